#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "piad/evalsuite.hpp"
#include "piad/physics.hpp"

using namespace piad::evalsuite;
using piad::dataio::Normalizer;
using piad::dataio::TimeSeriesFrame;
using piad::dataio::WindowData;
using piad::numerics::Tensor2;
using piad::numerics::Vector;

namespace {

// Fixed-output stub: forecasts a constant normalized value.
class ConstModel final : public piad::train::ForecastModel {
public:
    ConstModel(double value, std::size_t lookback, std::size_t horizon)
        : value_(value), lookback_(lookback), horizon_(horizon) {}
    std::string name() const override { return "const_stub"; }
    std::size_t lookback() const override { return lookback_; }
    std::size_t horizon() const override { return horizon_; }
    std::vector<piad::train::ParamSlot> param_slots() override { return {}; }
    Vector forecast(const WindowData&, piad::numerics::MacCounter*) const override {
        return Vector(horizon_, value_);
    }
    piad::train::TapeLoss build_loss(piad::numerics::GradTape&, const WindowData&) const override {
        throw std::logic_error("stub");
    }
    piad::model::Checkpoint checkpoint() const override { throw std::logic_error("stub"); }

private:
    double value_;
    std::size_t lookback_, horizon_;
};

// Seasonal-naive stub: repeats the window's last `period` target values.
// Exact on series with that period.
class SeasonalNaiveModel final : public piad::train::ForecastModel {
public:
    SeasonalNaiveModel(std::size_t lookback, std::size_t horizon, std::size_t period)
        : lookback_(lookback), horizon_(horizon), period_(period) {}
    std::string name() const override { return "seasonal_naive_stub"; }
    std::size_t lookback() const override { return lookback_; }
    std::size_t horizon() const override { return horizon_; }
    std::vector<piad::train::ParamSlot> param_slots() override { return {}; }
    Vector forecast(const WindowData& w, piad::numerics::MacCounter*) const override {
        Vector out(horizon_);
        for (std::size_t k = 0; k < horizon_; ++k) {
            out[k] = w.inputs(lookback_ - period_ + (k % period_), 0);
        }
        return out;
    }
    piad::train::TapeLoss build_loss(piad::numerics::GradTape&, const WindowData&) const override {
        throw std::logic_error("stub");
    }
    piad::model::Checkpoint checkpoint() const override { throw std::logic_error("stub"); }

private:
    std::size_t lookback_, horizon_, period_;
};

Normalizer identity_normalizer() {
    Normalizer n;
    n.channels.assign(piad::dataio::kCanonicalChannels.begin(),
                      piad::dataio::kCanonicalChannels.end());
    n.mean.assign(5, 0.0);
    n.stddev.assign(5, 1.0);
    return n;
}

WindowData plain_window(std::size_t lookback, const Vector& target) {
    WindowData w;
    w.inputs = Tensor2(lookback, 5, 0.0);
    w.target = target;
    return w;
}

// A day with a four-hour high block; period 24, events at the spikes.
TimeSeriesFrame spiky_frame(std::size_t days) {
    TimeSeriesFrame f;
    f.channels.assign(piad::dataio::kCanonicalChannels.begin(),
                      piad::dataio::kCanonicalChannels.end());
    const std::int64_t start = piad::dataio::parse_iso_hour("2021-01-04T00:00:00");
    const std::size_t n = days * 24;
    f.values.assign(5, std::vector<double>(n));
    f.missing.assign(5, std::vector<std::uint8_t>(n, 0));
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t hod = t % 24;
        f.time.push_back(start + static_cast<std::int64_t>(t));
        // alternating 390/410 base with a 500 ppm block: quartiles 390/410,
        // threshold 440, and a training mean near 417 (below the threshold)
        f.values[0][t] = hod >= 10 && hod < 14 ? 500.0 : (hod % 2 == 0 ? 390.0 : 410.0);
        f.values[1][t] = 21.0;
        f.values[2][t] = 10.0;
        f.values[3][t] = static_cast<double>(hod);
        f.values[4][t] = static_cast<double>((t / 24) % 7);
    }
    return f;
}

// Independent type-7 oracle: sort, interpolate order statistics.
double quantile_oracle(Vector values, double p) {
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace

TEST_CASE("evaluate_forecast on one window equals the plain losses") {
    const ConstModel model(0.0, 4, 2);
    const std::vector<WindowData> windows{plain_window(4, {1.0, 3.0})};
    const MetricsReport r = evaluate_forecast(model, windows, identity_normalizer(), 0);
    CHECK(r.mse == doctest::Approx(5.0));
    CHECK(r.mae == doctest::Approx(2.0));
    CHECK(r.mse_ppm == doctest::Approx(5.0));  // identity normalizer
    CHECK(r.window_count == 1);
}

TEST_CASE("evaluate_forecast averages per-window errors") {
    const ConstModel model(0.0, 4, 1);
    // per-window MSE 1 and 3
    const std::vector<WindowData> windows{plain_window(4, {1.0}),
                                          plain_window(4, {std::sqrt(3.0)})};
    const MetricsReport r = evaluate_forecast(model, windows, identity_normalizer(), 0);
    CHECK(r.mse == doctest::Approx(2.0));
}

TEST_CASE("a perfect model scores zero") {
    const ConstModel model(7.0, 4, 3);
    const std::vector<WindowData> windows{plain_window(4, {7.0, 7.0, 7.0})};
    const MetricsReport r = evaluate_forecast(model, windows, identity_normalizer(), 0);
    CHECK(r.mse == 0.0);
    CHECK(r.mae == 0.0);
    CHECK_THROWS_AS(evaluate_forecast(model, {}, identity_normalizer(), 0),
                    std::invalid_argument);
}

TEST_CASE("physical-unit errors scale with the target deviation") {
    Normalizer n = identity_normalizer();
    n.mean[0] = 100.0;
    n.stddev[0] = 50.0;
    const ConstModel model(0.0, 4, 1);
    const std::vector<WindowData> windows{plain_window(4, {2.0})};
    const MetricsReport r = evaluate_forecast(model, windows, n, 0);
    CHECK(r.mse == doctest::Approx(4.0));
    CHECK(r.mse_ppm == doctest::Approx(4.0 * 50.0 * 50.0));
    CHECK(r.mae_ppm == doctest::Approx(2.0 * 50.0));
}

// ---------------------------------------------------------------------------

TEST_CASE("event threshold on the 1..8 ladder") {
    const EventThreshold th = event_threshold({1, 2, 3, 4, 5, 6, 7, 8});
    CHECK(th.q1 == doctest::Approx(2.75));
    CHECK(th.q3 == doctest::Approx(6.25));
    CHECK(th.iqr == doctest::Approx(3.5));
    CHECK(th.threshold == doctest::Approx(11.5));
}

TEST_CASE("constant data collapses the threshold onto the value") {
    const EventThreshold th = event_threshold(Vector(50, 444.0));
    CHECK(th.threshold == 444.0);
    CHECK(th.iqr == 0.0);
}

TEST_CASE("fewer than four values is an error") {
    CHECK_THROWS_AS(event_threshold({1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("threshold equals the brute-force oracle on random data") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> dist(450.0, 60.0);
    for (int rep = 0; rep < 200; ++rep) {
        std::uniform_int_distribution<std::size_t> len(4, 400);
        Vector values(len(rng));
        for (double& v : values) v = dist(rng);
        const EventThreshold th = event_threshold(values);
        const double q1 = quantile_oracle(values, 0.25);
        const double q3 = quantile_oracle(values, 0.75);
        CHECK(th.q1 == q1);
        CHECK(th.q3 == q3);
        CHECK(th.threshold == q3 + 1.5 * (q3 - q1));
    }
}

TEST_CASE("classification is strict and monotone") {
    EventThreshold th;
    th.threshold = 451.12;
    CHECK(classify_events({440.0, 455.0}, th) == std::vector<int>{0, 1});
    CHECK(classify_events({451.12}, th) == std::vector<int>{0});  // boundary stays 0
    CHECK(classify_events({100.0, 200.0, 451.0}, th) == std::vector<int>{0, 0, 0});

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(300.0, 600.0);
    for (int rep = 0; rep < 100; ++rep) {
        const double v = dist(rng);
        const int before = classify_events({v}, th)[0];
        const int after = classify_events({v + 10.0}, th)[0];
        CHECK(after >= before);
    }
}

TEST_CASE("confusion metrics reproduce the reference counts") {
    std::vector<int> pred, truth;
    const auto emit = [&](int p, int t, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) {
            pred.push_back(p);
            truth.push_back(t);
        }
    };
    emit(1, 1, 192);   // TP
    emit(1, 0, 84);    // FP
    emit(0, 0, 3799);  // TN
    emit(0, 1, 76);    // FN
    const EventReport r = confusion_metrics(pred, truth);
    CHECK(r.tp == 192);
    CHECK(r.fp == 84);
    CHECK(r.tn == 3799);
    CHECK(r.fn == 76);
    CHECK(100.0 * r.accuracy == doctest::Approx(96.15).epsilon(0.0001));
    CHECK(100.0 * r.precision == doctest::Approx(69.57).epsilon(0.0001));
    CHECK(100.0 * r.recall == doctest::Approx(71.64).epsilon(0.0001));
    CHECK(100.0 * r.f1 == doctest::Approx(70.59).epsilon(0.0001));
    CHECK(r.tp + r.fp + r.tn + r.fn == pred.size());
}

TEST_CASE("confusion metrics degenerate cases") {
    const EventReport perfect = confusion_metrics({1, 0}, {1, 0});
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    const EventReport none = confusion_metrics({0, 0, 0}, {0, 0, 1});
    CHECK(none.tp == 0);
    CHECK(none.precision == 0.0);  // zero denominator decision
    CHECK(none.recall == 0.0);
    CHECK(none.f1 == 0.0);

    CHECK_THROWS_AS(confusion_metrics({1}, {1, 0}), std::invalid_argument);
}

TEST_CASE("event pipeline behaves as forced by construction") {
    const TimeSeriesFrame frame = spiky_frame(20);  // 480 rows
    const piad::dataio::SplitPlan split =
        piad::dataio::chronological_split(frame, {0.5, 0.2, 0.3}, true);
    const Normalizer normalizer = piad::dataio::fit_normalizer(frame, split.train);

    // the seasonal-naive stub is exact on this periodic series
    const SeasonalNaiveModel perfect(48, 24, 24);
    const EventReport exact = event_pipeline(perfect, frame, split, normalizer, "co2_in");
    CHECK(exact.fp == 0);
    CHECK(exact.fn == 0);
    CHECK(exact.tp > 0);

    // training-mean forecaster sits below the threshold: no positives
    const double mean_norm = 0.0;  // training mean in normalized units
    const ConstModel low(mean_norm, 48, 24);
    const EventReport misses = event_pipeline(low, frame, split, normalizer, "co2_in");
    CHECK(misses.tp == 0);
    CHECK(misses.fp == 0);
    CHECK(misses.fn == exact.tp);

    // constant-high forecaster: everything flagged
    const ConstModel high(normalizer.apply_one(0, 1000.0), 48, 24);
    const EventReport shouts = event_pipeline(high, frame, split, normalizer, "co2_in");
    CHECK(shouts.tn == 0);
    CHECK(shouts.fn == 0);

    CHECK(exact.tp + exact.fp + exact.tn + exact.fn ==
          misses.tp + misses.fp + misses.tn + misses.fn);
}

TEST_CASE("event pipeline rejects a test range shorter than one window") {
    const TimeSeriesFrame frame = spiky_frame(5);
    const piad::dataio::SplitPlan split =
        piad::dataio::chronological_split(frame, {0.8, 0.1, 0.1}, true);
    const Normalizer normalizer = piad::dataio::fit_normalizer(frame, split.train);
    const SeasonalNaiveModel model(48, 24, 24);
    CHECK_THROWS_AS(event_pipeline(model, frame, split, normalizer, "co2_in"),
                    std::invalid_argument);
}

// ---------------------------------------------------------------------------

TEST_CASE("imputation is the identity on fully observed frames") {
    const TimeSeriesFrame frame = spiky_frame(10);
    const Normalizer n = piad::dataio::fit_normalizer(frame, {0, frame.rows()});
    const SeasonalNaiveModel model(48, 1, 24);
    const ImputationResult r = impute_series(model, frame, n, "co2_in");
    CHECK(r.imputed_rows.empty());
    CHECK(r.frame.values == frame.values);
    CHECK(r.frame.missing == frame.missing);
}

TEST_CASE("a single gap on an exactly learnable series is filled with the truth") {
    TimeSeriesFrame frame = spiky_frame(10);
    const Normalizer n = piad::dataio::fit_normalizer(frame, {0, frame.rows()});
    const double truth = frame.values[0][100];
    TimeSeriesFrame holed = frame;
    holed.missing[0][100] = 1;
    holed.values[0][100] = -1.0;  // garbage behind the mask

    const SeasonalNaiveModel model(48, 1, 24);
    const ImputationResult r = impute_series(model, holed, n, "co2_in");
    REQUIRE(r.imputed_rows == std::vector<std::size_t>{100});
    CHECK(r.frame.missing[0][100] == 0);
    CHECK(r.frame.values[0][100] == doctest::Approx(truth).epsilon(1e-9));
}

TEST_CASE("contiguous block is filled completely, observed cells untouched bitwise") {
    TimeSeriesFrame frame = spiky_frame(30);
    TimeSeriesFrame holed = frame;
    for (std::size_t t = 400; t < 498; ++t) holed.missing[0][t] = 1;
    const Normalizer n = piad::dataio::fit_normalizer(holed, {0, 400});

    const SeasonalNaiveModel model(48, 1, 24);
    const ImputationResult r = impute_series(model, holed, n, "co2_in");
    CHECK(r.imputed_rows.size() == 98);
    for (auto m : r.frame.missing[0]) CHECK(m == 0);
    for (std::size_t t = 0; t < frame.rows(); ++t) {
        if (t >= 400 && t < 498) continue;
        CHECK(r.frame.values[0][t] == frame.values[0][t]);  // bitwise
    }
    // recursive fills consumed earlier fills; on periodic data they stay exact
    for (std::size_t t = 400; t < 498; ++t) {
        CHECK(r.frame.values[0][t] == doctest::Approx(frame.values[0][t]).epsilon(1e-9));
    }
}

TEST_CASE("masked cells in the first lookback rows need the fallback flag") {
    TimeSeriesFrame holed = spiky_frame(10);
    holed.missing[0][3] = 1;
    const Normalizer n = piad::dataio::fit_normalizer(holed, {0, holed.rows()});
    const SeasonalNaiveModel model(48, 1, 24);
    CHECK_THROWS_WITH_AS(impute_series(model, holed, n, "co2_in"),
                         doctest::Contains("fallback"), std::invalid_argument);

    const ImputationResult r = impute_series(model, holed, n, "co2_in", true);
    CHECK(r.frame.values[0][3] == n.mean[0]);
    CHECK(r.frame.missing[0][3] == 0);
}
