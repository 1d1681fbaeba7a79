#include "piad/evalsuite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace piad::evalsuite {

using dataio::WindowData;
using numerics::Tensor2;

MetricsReport evaluate_forecast(const train::ForecastModel& model,
                                const std::vector<WindowData>& test_windows,
                                const Normalizer& normalizer, std::size_t target_channel) {
    if (test_windows.empty()) throw std::invalid_argument("evaluate_forecast: empty test set");

    const auto t0 = std::chrono::steady_clock::now();
    MetricsReport report;
    report.model = model.name();
    report.horizon = model.horizon();
    report.window_count = test_windows.size();

    for (const WindowData& w : test_windows) {
        const Vector pred = model.forecast(w);
        report.mse += train::mse(pred, w.target);
        report.mae += train::mae(pred, w.target);

        Vector pred_ppm(pred.size()), target_ppm(w.target.size());
        for (std::size_t i = 0; i < pred.size(); ++i) {
            pred_ppm[i] = normalizer.invert_one(target_channel, pred[i]);
            target_ppm[i] = normalizer.invert_one(target_channel, w.target[i]);
        }
        report.mse_ppm += train::mse(pred_ppm, target_ppm);
        report.mae_ppm += train::mae(pred_ppm, target_ppm);
    }
    const double inv = 1.0 / static_cast<double>(test_windows.size());
    report.mse *= inv;
    report.mae *= inv;
    report.mse_ppm *= inv;
    report.mae_ppm *= inv;
    report.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

// ---------------------------------------------------------------------------

namespace {

double quantile_type7(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    const double h = static_cast<double>(n - 1) * p;
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= n) return sorted[n - 1];
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

EventThreshold event_threshold(const Vector& train_ppm, const std::string& fitted_on) {
    if (train_ppm.size() < 4) {
        throw std::invalid_argument("event_threshold: need at least 4 values, got " +
                                    std::to_string(train_ppm.size()));
    }
    std::vector<double> sorted = train_ppm;
    std::sort(sorted.begin(), sorted.end());

    EventThreshold th;
    th.q1 = quantile_type7(sorted, 0.25);
    th.q3 = quantile_type7(sorted, 0.75);
    th.iqr = th.q3 - th.q1;
    th.threshold = th.q3 + 1.5 * th.iqr;
    th.fitted_on = fitted_on;
    return th;
}

std::vector<int> classify_events(const Vector& ppm, const EventThreshold& th) {
    std::vector<int> labels(ppm.size());
    for (std::size_t i = 0; i < ppm.size(); ++i) labels[i] = ppm[i] > th.threshold ? 1 : 0;
    return labels;
}

EventReport confusion_metrics(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size()) {
        throw std::invalid_argument("confusion_metrics: label lengths differ, " +
                                    std::to_string(predicted.size()) + " vs " +
                                    std::to_string(truth.size()));
    }
    EventReport r;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (truth[i] == 1) {
            predicted[i] == 1 ? ++r.tp : ++r.fn;
        } else {
            predicted[i] == 1 ? ++r.fp : ++r.tn;
        }
    }
    const auto rate = [](std::uint64_t num, std::uint64_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    r.accuracy = rate(r.tp + r.tn, r.tp + r.tn + r.fp + r.fn);
    r.precision = rate(r.tp, r.tp + r.fp);
    r.recall = rate(r.tp, r.tp + r.fn);
    r.f1 = (r.precision + r.recall) == 0.0
               ? 0.0
               : 2.0 * r.precision * r.recall / (r.precision + r.recall);
    return r;
}

EventReport event_pipeline(const train::ForecastModel& model, const TimeSeriesFrame& frame,
                           const SplitPlan& split, const Normalizer& normalizer,
                           const std::string& target_channel) {
    const std::size_t target = frame.channel_index(target_channel);
    const std::size_t lookback = model.lookback();
    const std::size_t horizon = model.horizon();
    if (split.test.size() < lookback + horizon) {
        throw std::invalid_argument("event_pipeline: test range of " +
                                    std::to_string(split.test.size()) +
                                    " rows is shorter than L+T");
    }

    Vector train_ppm;
    train_ppm.reserve(split.train.size());
    for (std::size_t t = split.train.begin; t < split.train.end; ++t) {
        if (!frame.missing[target][t]) train_ppm.push_back(frame.values[target][t]);
    }
    const EventThreshold th = event_threshold(train_ppm);

    const TimeSeriesFrame normalized = dataio::apply_normalizer(normalizer, frame);

    std::vector<int> predicted, truth;
    for (std::size_t origin = split.test.begin + lookback; origin + horizon <= split.test.end;
         origin += horizon) {
        bool masked_input = false;
        for (std::size_t t = origin - lookback; t < origin && !masked_input; ++t) {
            for (std::size_t c = 0; c < frame.channels.size(); ++c) {
                if (frame.missing[c][t]) {
                    masked_input = true;
                    break;
                }
            }
        }
        if (masked_input) continue;

        WindowData w;
        w.inputs = Tensor2(lookback, frame.channels.size());
        for (std::size_t t = 0; t < lookback; ++t) {
            for (std::size_t c = 0; c < frame.channels.size(); ++c) {
                w.inputs(t, c) = normalized.values[c][origin - lookback + t];
            }
        }
        w.target.assign(horizon, 0.0);
        const Vector pred = model.forecast(w);

        for (std::size_t k = 0; k < horizon; ++k) {
            if (frame.missing[target][origin + k]) continue;  // no ground truth
            const double pred_ppm = normalizer.invert_one(target, pred[k]);
            predicted.push_back(pred_ppm > th.threshold ? 1 : 0);
            truth.push_back(frame.values[target][origin + k] > th.threshold ? 1 : 0);
        }
    }
    return confusion_metrics(predicted, truth);
}

// ---------------------------------------------------------------------------

ImputationResult impute_series(const train::ForecastModel& model, const TimeSeriesFrame& frame,
                               const Normalizer& normalizer, const std::string& target_channel,
                               bool mean_fallback) {
    frame.validate();
    const std::size_t target = frame.channel_index(target_channel);
    const std::size_t lookback = model.lookback();
    const std::size_t n = frame.rows();
    const std::size_t n_ch = frame.channels.size();

    ImputationResult result;
    result.frame = frame;
    TimeSeriesFrame& out = result.frame;

    // Covariates carried forward past masked cells, training mean before the
    // first observation. Used for input assembly only.
    std::vector<std::vector<double>> filled(n_ch);
    for (std::size_t c = 0; c < n_ch; ++c) {
        filled[c].resize(n);
        double carry = normalizer.mean[c];
        for (std::size_t t = 0; t < n; ++t) {
            if (!frame.missing[c][t]) carry = frame.values[c][t];
            filled[c][t] = carry;
        }
    }

    WindowData w;
    w.inputs = Tensor2(lookback, n_ch);
    w.target.assign(model.horizon(), 0.0);

    for (std::size_t t = 0; t < n; ++t) {
        if (!out.missing[target][t]) continue;
        if (t < lookback) {
            if (!mean_fallback) {
                throw std::invalid_argument(
                    "impute_series: masked target cell at row " + std::to_string(t) +
                    " lies within the first " + std::to_string(lookback) +
                    " rows; enable the training-mean fallback to fill it");
            }
            out.values[target][t] = normalizer.mean[target];
        } else {
            for (std::size_t k = 0; k < lookback; ++k) {
                const std::size_t row = t - lookback + k;
                for (std::size_t c = 0; c < n_ch; ++c) {
                    // Earlier target fills have cleared their missing flag,
                    // so they are consumed here; masked covariates fall back
                    // to the carried-forward value.
                    const double raw =
                        out.missing[c][row] ? filled[c][row] : out.values[c][row];
                    w.inputs(k, c) = normalizer.apply_one(c, raw);
                }
            }
            const Vector pred = model.forecast(w);
            out.values[target][t] = normalizer.invert_one(target, pred[0]);
        }
        out.missing[target][t] = 0;
        filled[target][t] = out.values[target][t];
        result.imputed_rows.push_back(t);
    }
    return result;
}

}  // namespace piad::evalsuite
