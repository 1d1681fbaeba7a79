#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "piad/dataio.hpp"
#include "piad/physics.hpp"

using namespace piad::dataio;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

TimeSeriesFrame small_frame(std::size_t n) {
    TimeSeriesFrame f;
    f.channels.assign(kCanonicalChannels.begin(), kCanonicalChannels.end());
    f.values.resize(5);
    f.missing.resize(5);
    const std::int64_t start = parse_iso_hour("2021-01-04T00:00:00");
    for (std::size_t t = 0; t < n; ++t) {
        f.time.push_back(start + static_cast<std::int64_t>(t));
        f.values[0].push_back(500.0 + static_cast<double>(t));
        f.values[1].push_back(21.0);
        f.values[2].push_back(10.0);
        f.values[3].push_back(static_cast<double>(t % 24));
        f.values[4].push_back(static_cast<double>((t / 24) % 7));
        for (auto& col : f.missing) {
            if (col.size() < t + 1) col.push_back(0);
        }
    }
    return f;
}

}  // namespace

TEST_CASE("iso timestamps round-trip and expose calendar fields") {
    const std::int64_t h = parse_iso_hour("2021-01-04T13:00:00");
    CHECK(format_iso_hour(h) == "2021-01-04T13:00:00");
    CHECK(hour_of_day(h) == 13);
    CHECK(weekday(h) == 0);  // a Monday
    CHECK(weekday(h + 24) == 1);
    CHECK(weekday(h - 24) == 6);

    CHECK_THROWS_AS(parse_iso_hour("2021-01-04 13:00:00"), CsvError);
    CHECK_THROWS_AS(parse_iso_hour("2021-01-04T13:30:00"), CsvError);
}

TEST_CASE("csv round trip preserves values, mask, and timestamps") {
    const auto scenario = piad::physics::office_scenario(400, 21);
    TimeSeriesFrame frame = piad::physics::generate_scenario(scenario);
    frame.missing[0][37] = 1;  // hand-punched hole
    frame.missing[2][101] = 1;

    const std::string path = temp_path("piad_roundtrip.csv");
    write_csv(frame, path);
    const TimeSeriesFrame back = read_csv(path);

    CHECK(back.time == frame.time);
    CHECK(back.missing == frame.missing);
    for (std::size_t c = 0; c < 5; ++c) {
        for (std::size_t t = 0; t < frame.rows(); ++t) {
            if (frame.missing[c][t]) continue;
            CHECK(back.values[c][t] == frame.values[c][t]);  // bit-exact
        }
    }
    std::remove(path.c_str());
}

TEST_CASE("empty fields become masked cells") {
    const std::string path = temp_path("piad_missing.csv");
    write_text(path,
               "timestamp,co2_in,t_in,t_out,hour,num_week\n"
               "2021-01-04T00:00:00,500,21,10,0,0\n"
               "2021-01-04T01:00:00,,21,10,1,0\n");
    const TimeSeriesFrame f = read_csv(path);
    CHECK(f.missing[0][1] == 1);
    CHECK(f.missing[1][1] == 0);
    std::remove(path.c_str());
}

TEST_CASE("csv errors cite the line number") {
    const std::string header = "timestamp,co2_in,t_in,t_out,hour,num_week\n";
    const std::string row0 = "2021-01-04T00:00:00,500,21,10,0,0\n";

    const std::string dup = temp_path("piad_dup.csv");
    write_text(dup, header + row0 + "2021-01-04T00:00:00,501,21,10,0,0\n");
    CHECK_THROWS_WITH_AS(read_csv(dup), doctest::Contains(":3:"), CsvError);

    const std::string gap = temp_path("piad_gap.csv");
    write_text(gap, header + row0 + "2021-01-04T05:00:00,501,21,10,5,0\n");
    CHECK_THROWS_AS(read_csv(gap), CsvError);

    const std::string ragged = temp_path("piad_ragged.csv");
    write_text(ragged, header + row0 + "2021-01-04T01:00:00,501,21,10,1\n");
    CHECK_THROWS_WITH_AS(read_csv(ragged), doctest::Contains(":3:"), CsvError);

    const std::string badhdr = temp_path("piad_badhdr.csv");
    write_text(badhdr, "time,co2\n");
    CHECK_THROWS_WITH_AS(read_csv(badhdr), doctest::Contains("unknown header"), CsvError);

    for (const auto& p : {dup, gap, ragged, badhdr}) std::remove(p.c_str());
}

TEST_CASE("normalizer statistics and inversion") {
    TimeSeriesFrame f = small_frame(2);
    f.values[0] = {0.0, 10.0};
    const Normalizer n = fit_normalizer(f, {0, 2});
    CHECK(n.mean[0] == doctest::Approx(5.0));
    CHECK(n.stddev[0] == doctest::Approx(5.0));  // population std
    CHECK(n.apply_one(0, 0.0) == doctest::Approx(-1.0));
    CHECK(n.apply_one(0, 10.0) == doctest::Approx(1.0));

    // constant channel hits the std floor and normalizes to zero
    CHECK(n.stddev[1] == Normalizer::kStdFloor);
    CHECK(n.apply_one(1, 21.0) == doctest::Approx(0.0));

    for (double v : {123.456, -2.0, 0.0, 777.7}) {
        CHECK(n.invert_one(0, n.apply_one(0, v)) == doctest::Approx(v).epsilon(1e-10));
    }
}

TEST_CASE("normalizer skips masked cells and rejects fully masked channels") {
    TimeSeriesFrame f = small_frame(4);
    f.values[0] = {100.0, 9999.0, 100.0, 100.0};
    f.missing[0][1] = 1;
    const Normalizer n = fit_normalizer(f, {0, 4});
    CHECK(n.mean[0] == doctest::Approx(100.0));

    for (auto& m : f.missing[0]) m = 1;
    CHECK_THROWS_WITH_AS(fit_normalizer(f, {0, 4}), doctest::Contains("co2_in"),
                         std::invalid_argument);
}

TEST_CASE("normalization statistics depend only on the train range") {
    const auto frame = piad::physics::generate_scenario(piad::physics::office_scenario(300, 31));
    const Normalizer full = fit_normalizer(frame, {0, 180});

    // Refit on a frame whose tail is replaced by garbage: same stats.
    TimeSeriesFrame mangled = frame;
    for (std::size_t t = 180; t < mangled.rows(); ++t) mangled.values[0][t] = -1e6;
    const Normalizer refit = fit_normalizer(mangled, {0, 180});
    CHECK(full.mean == refit.mean);
    CHECK(full.stddev == refit.stddev);
}

TEST_CASE("chronological split follows the ratios") {
    const TimeSeriesFrame f = small_frame(100);
    const SplitPlan plan = chronological_split(f, {0.6, 0.2, 0.2}, true);
    CHECK(plan.train.begin == 0);
    CHECK(plan.train.end == 60);
    CHECK(plan.val.begin == 60);
    CHECK(plan.val.end == 80);
    CHECK(plan.test.begin == 80);
    CHECK(plan.test.end == 100);
}

TEST_CASE("masked cells pull the test boundary earlier") {
    TimeSeriesFrame f = small_frame(100);
    for (std::size_t t = 50; t < 70; ++t) f.missing[0][t] = 1;
    const SplitPlan plan = chronological_split(f, {0.6, 0.2, 0.2}, true);
    CHECK(plan.test.begin == 50);
    CHECK(plan.train.end == 50);
    CHECK(plan.val.size() == 0);

    // Policy off: nominal boundaries stand.
    const SplitPlan keep = chronological_split(f, {0.6, 0.2, 0.2}, false);
    CHECK(keep.test.begin == 80);
}

TEST_CASE("split validates ratios and minimum train length") {
    const TimeSeriesFrame f = small_frame(100);
    CHECK_THROWS_AS(chronological_split(f, {0.6, 0.2, 0.1}, true), std::invalid_argument);
    CHECK_THROWS_AS(chronological_split(f, {0.6, 0.2, 0.2}, true, 61), std::invalid_argument);
}

TEST_CASE("window count formula and bounds") {
    const TimeSeriesFrame f = small_frame(10);
    const WindowSpec spec{3, 2, 1};
    const auto windows = make_windows(f, spec, {0, 10}, "co2_in");
    CHECK(windows.size() == 6);

    CHECK(make_windows(f, WindowSpec{3, 2, 1}, {0, 5}, "co2_in").size() == 1);
    CHECK_THROWS_AS(make_windows(f, WindowSpec{3, 2, 1}, {0, 4}, "co2_in"), std::invalid_argument);

    // windows tile contiguously: inputs then targets, no gap
    const WindowData w = materialize_window(f, windows[2], spec, 0);
    CHECK(w.inputs(0, 0) == f.values[0][2]);
    CHECK(w.inputs(2, 0) == f.values[0][4]);
    CHECK(w.target[0] == f.values[0][5]);
    CHECK(w.target[1] == f.values[0][6]);
}

TEST_CASE("windows flag masked cells") {
    TimeSeriesFrame f = small_frame(12);
    f.missing[1][1] = 1;  // covariate in the first window's inputs
    f.missing[0][9] = 1;  // target inside later horizons
    const auto windows = make_windows(f, WindowSpec{3, 2, 1}, {0, 12}, "co2_in");
    REQUIRE(windows.size() == 8);
    CHECK(windows[0].masked_input);
    CHECK_FALSE(windows[0].masked_target);
    CHECK(windows[5].masked_target);  // horizon rows 8,9
    CHECK(windows[6].masked_target);  // horizon rows 9,10
    CHECK_FALSE(windows[7].masked_target);
    // the masked target row also sits in window 7..9's input range
    CHECK(windows[7].masked_input);
}

TEST_CASE("split ranges partition the frame") {
    const auto frame = piad::physics::generate_scenario(piad::physics::office_scenario(257, 3));
    const SplitPlan plan = chronological_split(frame, {0.7, 0.15, 0.15}, true);
    CHECK(plan.train.begin == 0);
    CHECK(plan.train.end == plan.val.begin);
    CHECK(plan.val.end == plan.test.begin);
    CHECK(plan.test.end == frame.rows());
}
