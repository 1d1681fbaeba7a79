#include <doctest.h>

#include <cmath>

#include "piad/physics.hpp"

using piad::dataio::TimeSeriesFrame;
using piad::numerics::Vector;
using piad::physics::generate_scenario;
using piad::physics::inject_missingness;
using piad::physics::MissingMode;
using piad::physics::office_scenario;
using piad::physics::PhysicsConfig;
using piad::physics::Scenario;
using piad::physics::simulate_co2;
using piad::physics::steady_state;

namespace {

// rho=1.2, V=100, mdot=120 -> air change rate exactly 1/h.
PhysicsConfig unit_rate_config(double co2_out, double generation) {
    PhysicsConfig cfg;
    cfg.mdot = 120.0;
    cfg.rho = 1.2;
    cfg.volume = 100.0;
    cfg.co2_out = {co2_out};
    cfg.generation = {generation};
    return cfg;
}

}  // namespace

TEST_CASE("constant-input run converges to the analytic steady state") {
    const PhysicsConfig cfg = unit_rate_config(420.0, 500.0);
    CHECK(steady_state(cfg) == doctest::Approx(920.0));

    const Vector c = simulate_co2(cfg, 420.0, 48);
    // 0.1% of the initial 500 ppm gap, reached well inside 10 time constants
    CHECK(std::abs(c[9] - 920.0) < 0.001 * 500.0);
    // |C(t) - steady| strictly shrinking until it saturates at the fp floor
    for (std::size_t t = 1; t < c.size(); ++t) {
        const double prev = std::abs(c[t - 1] - 920.0);
        if (prev < 1e-9) break;
        CHECK(std::abs(c[t] - 920.0) < prev);
    }
}

TEST_CASE("pure decay matches the closed-form exponential at one hour") {
    const PhysicsConfig cfg = unit_rate_config(400.0, 0.0);
    const Vector c = simulate_co2(cfg, 1000.0, 1);
    const double exact = 400.0 + 600.0 * std::exp(-1.0);
    CHECK(std::abs(c[0] - exact) / exact < 1e-4);
}

TEST_CASE("no ventilation degenerates to linear growth") {
    PhysicsConfig cfg;
    cfg.mdot = 0.0;
    cfg.co2_out = {400.0};
    cfg.generation = {25.0};
    const Vector c = simulate_co2(cfg, 500.0, 10);
    for (std::size_t t = 0; t < c.size(); ++t) {
        CHECK(c[t] == doctest::Approx(500.0 + 25.0 * static_cast<double>(t + 1)).epsilon(1e-12));
    }
}

TEST_CASE("steady state algebra") {
    CHECK(steady_state(unit_rate_config(420.0, 0.0)) == doctest::Approx(420.0));

    PhysicsConfig cfg = unit_rate_config(420.0, 500.0);
    const double base_offset = steady_state(cfg) - 420.0;
    cfg.volume *= 2.0;
    CHECK(steady_state(cfg) - 420.0 == doctest::Approx(2.0 * base_offset));

    PhysicsConfig no_vent = unit_rate_config(420.0, 500.0);
    no_vent.mdot = 0.0;
    CHECK_THROWS_AS(steady_state(no_vent), std::invalid_argument);
}

TEST_CASE("halving the step barely moves hourly samples") {
    PhysicsConfig cfg = unit_rate_config(420.0, 300.0);
    cfg.step = 0.05;
    const Vector coarse = simulate_co2(cfg, 450.0, 24);
    cfg.step = 0.025;
    const Vector fine = simulate_co2(cfg, 450.0, 24);
    for (std::size_t t = 0; t < coarse.size(); ++t) {
        CHECK(std::abs(coarse[t] - fine[t]) / fine[t] < 1e-6);
    }
}

TEST_CASE("scenario generation is deterministic per seed") {
    const TimeSeriesFrame a = generate_scenario(office_scenario(300, 9));
    const TimeSeriesFrame b = generate_scenario(office_scenario(300, 9));
    const TimeSeriesFrame c = generate_scenario(office_scenario(300, 10));
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
}

TEST_CASE("scenario frame carries the canonical channels and calendar") {
    const TimeSeriesFrame frame = generate_scenario(office_scenario(200, 1));
    REQUIRE(frame.rows() == 200);
    REQUIRE(frame.channels.size() == 5);
    const std::size_t hour = frame.channel_index("hour");
    const std::size_t dow = frame.channel_index("num_week");
    for (std::size_t t = 0; t < frame.rows(); ++t) {
        CHECK(frame.values[hour][t] == static_cast<double>(t % 24));
        CHECK(frame.values[dow][t] == static_cast<double>((t / 24) % 7));
    }
    for (const auto& col : frame.missing) {
        for (auto m : col) CHECK(m == 0);
    }
}

TEST_CASE("empty office decays toward the outdoor level") {
    Scenario s = office_scenario(24 * 14, 4);
    for (double& o : s.occupancy) o = 0.0;
    s.noise_ppm = 0.0;
    s.initial_co2 = 900.0;
    const TimeSeriesFrame frame = generate_scenario(s);
    const std::size_t co2 = frame.channel_index("co2_in");
    const double last = frame.values[co2].back();
    // outdoor profile hovers around 420 ppm
    CHECK(last > 400.0);
    CHECK(last < 440.0);
}

TEST_CASE("missingness injection masks the exact count") {
    const TimeSeriesFrame frame = generate_scenario(office_scenario(500, 7));

    const TimeSeriesFrame none = inject_missingness(frame, 0.0, MissingMode::Random, 1);
    for (const auto& col : none.missing) {
        for (auto m : col) CHECK(m == 0);
    }

    const TimeSeriesFrame all = inject_missingness(frame, 1.0, MissingMode::Random, 1, {"co2_in"});
    const std::size_t co2 = all.channel_index("co2_in");
    std::size_t count = 0;
    for (auto m : all.missing[co2]) count += m;
    CHECK(count == 500);

    const TimeSeriesFrame some =
        inject_missingness(frame, 0.136, MissingMode::ContiguousBlock, 3, {"co2_in", "t_in"});
    const std::size_t expect = static_cast<std::size_t>(0.136 * 500);
    for (const char* name : {"co2_in", "t_in"}) {
        const std::size_t c = some.channel_index(name);
        std::size_t masked = 0;
        std::size_t first = 500, last = 0;
        for (std::size_t t = 0; t < 500; ++t) {
            if (some.missing[c][t]) {
                ++masked;
                first = std::min(first, t);
                last = t;
            }
        }
        CHECK(masked == expect);
        CHECK(last - first + 1 == expect);  // one contiguous block
    }
    const std::size_t t_out = some.channel_index("t_out");
    for (auto m : some.missing[t_out]) CHECK(m == 0);
}

TEST_CASE("the paper-scale fraction masks 2823 of 20760 rows") {
    // Block size check only; building a 20760-row frame is cheap.
    const TimeSeriesFrame frame = generate_scenario(office_scenario(20760, 2));
    const TimeSeriesFrame masked =
        inject_missingness(frame, 0.136, MissingMode::ContiguousBlock, 11, {"co2_in"});
    const std::size_t co2 = masked.channel_index("co2_in");
    std::size_t count = 0;
    for (auto m : masked.missing[co2]) count += m;
    CHECK(count == 2823);
}

TEST_CASE("profile length mismatches are rejected") {
    Scenario s = office_scenario(100, 5);
    s.t_in.pop_back();
    CHECK_THROWS_AS(generate_scenario(s), std::invalid_argument);
}
