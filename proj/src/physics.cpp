#include "piad/physics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace piad::physics {

namespace {

double profile_at(const Vector& profile, std::size_t hour) {
    return profile.size() == 1 ? profile[0] : profile[std::min(hour, profile.size() - 1)];
}

}  // namespace

void PhysicsConfig::validate(std::size_t hours) const {
    if (rho <= 0.0 || volume <= 0.0) {
        throw std::invalid_argument("physics: rho and volume must be positive");
    }
    if (mdot < 0.0) throw std::invalid_argument("physics: mdot must be >= 0");
    if (step <= 0.0) throw std::invalid_argument("physics: step must be positive");
    for (double g : generation) {
        if (g < 0.0) throw std::invalid_argument("physics: generation values must be >= 0");
    }
    if (co2_out.empty() || generation.empty()) {
        throw std::invalid_argument("physics: co2_out and generation profiles must be non-empty");
    }
    if (hours > 0) {
        if (co2_out.size() != 1 && co2_out.size() < hours) {
            throw std::invalid_argument("physics: co2_out profile shorter than the run");
        }
        if (generation.size() != 1 && generation.size() < hours) {
            throw std::invalid_argument("physics: generation profile shorter than the run");
        }
    }
}

Vector simulate_co2(const PhysicsConfig& cfg, double c0, std::size_t hours) {
    cfg.validate(hours);
    if (c0 < 0.0) throw std::invalid_argument("simulate_co2: c0 must be >= 0");

    const double a = cfg.air_change_rate();
    const std::size_t substeps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(1.0 / cfg.step)));
    const double h = 1.0 / static_cast<double>(substeps);

    Vector out;
    out.reserve(hours);
    double c = c0;
    for (std::size_t hour = 0; hour < hours; ++hour) {
        const double cout = profile_at(cfg.co2_out, hour);
        const double g = profile_at(cfg.generation, hour);
        const auto f = [&](double x) { return a * (cout - x) + g; };
        for (std::size_t s = 0; s < substeps; ++s) {
            const double k1 = f(c);
            const double k2 = f(c + 0.5 * h * k1);
            const double k3 = f(c + 0.5 * h * k2);
            const double k4 = f(c + h * k3);
            c += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!std::isfinite(c)) {
                throw numerics::NonFiniteError("simulate_co2: non-finite state at hour " +
                                               std::to_string(hour) + ", substep " +
                                               std::to_string(s));
            }
        }
        out.push_back(c);
    }
    return out;
}

double steady_state(const PhysicsConfig& cfg) {
    cfg.validate(0);
    for (double v : cfg.co2_out) {
        if (v != cfg.co2_out[0]) {
            throw std::invalid_argument("steady_state: co2_out profile is not constant");
        }
    }
    for (double v : cfg.generation) {
        if (v != cfg.generation[0]) {
            throw std::invalid_argument("steady_state: generation profile is not constant");
        }
    }
    if (cfg.mdot == 0.0) {
        throw std::invalid_argument("steady_state: no finite steady state with mdot = 0");
    }
    return cfg.co2_out[0] + cfg.generation[0] / cfg.air_change_rate();
}

void Scenario::validate() const {
    if (length == 0) throw std::invalid_argument("scenario: length must be >= 1");
    if (occupancy.size() != length || co2_out.size() != length || t_in.size() != length ||
        t_out.size() != length) {
        throw std::invalid_argument("scenario: all profiles must share the configured length");
    }
    if (per_person_ppm_h < 0.0) throw std::invalid_argument("scenario: negative generation rate");
}

Scenario office_scenario(std::size_t hours, std::uint64_t seed) {
    Scenario s;
    s.length = hours;
    s.seed = seed;
    // 2021-01-04 was a Monday.
    s.start_time = dataio::parse_iso_hour("2021-01-04T00:00:00");
    s.noise_ppm = 2.0;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    s.occupancy.resize(hours, 0.0);
    s.co2_out.resize(hours);
    s.t_in.resize(hours);
    s.t_out.resize(hours);

    double headcount = 0.0;
    double meeting = 0.0;
    for (std::size_t t = 0; t < hours; ++t) {
        const std::int64_t abs_hour = s.start_time + static_cast<std::int64_t>(t);
        const int hod = dataio::hour_of_day(abs_hour);
        const int dow = dataio::weekday(abs_hour);

        if (hod == 0) {
            // Base staffing for the day, light jitter; empty on weekends.
            headcount = dow < 5 ? 2.0 + std::floor(unit(rng) * 3.0) : 0.0;
            meeting = dow < 5 && unit(rng) < 0.3 ? 9.0 + std::floor(unit(rng) * 6.0) : 0.0;
        }
        double occ = 0.0;
        if (dow < 5 && hod >= 9 && hod < 17) {
            occ = headcount;
            if (meeting > 0.0 && hod >= static_cast<int>(meeting) &&
                hod < static_cast<int>(meeting) + 2) {
                occ += 6.0;  // two-hour meeting crowd
            }
        }
        s.occupancy[t] = occ;

        const double day = static_cast<double>(t) / 24.0;
        s.co2_out[t] = 420.0 + 8.0 * std::sin(2.0 * M_PI * (hod - 4) / 24.0) + 2.0 * (unit(rng) - 0.5);
        s.t_out[t] = 12.0 + 6.0 * std::sin(2.0 * M_PI * day / 365.0) +
                     5.5 * std::sin(2.0 * M_PI * (hod - 9) / 24.0) + 0.6 * (unit(rng) - 0.5);
        s.t_in[t] = 21.5 + 1.2 * std::sin(2.0 * M_PI * (hod - 10) / 24.0) +
                    0.05 * (s.t_out[t] - 12.0) + 0.3 * (unit(rng) - 0.5);
    }
    return s;
}

dataio::TimeSeriesFrame generate_scenario(const Scenario& s) {
    s.validate();

    PhysicsConfig cfg = s.physics;
    cfg.co2_out = s.co2_out;
    cfg.generation.resize(s.length);
    for (std::size_t t = 0; t < s.length; ++t) {
        cfg.generation[t] = s.occupancy[t] * s.per_person_ppm_h;
    }

    Vector co2 = simulate_co2(cfg, s.initial_co2, s.length);
    if (s.noise_ppm > 0.0) {
        std::mt19937_64 rng(s.seed ^ 0x9e3779b97f4a7c15ull);
        std::normal_distribution<double> noise(0.0, s.noise_ppm);
        for (double& v : co2) v = std::max(0.0, v + noise(rng));
    }

    dataio::TimeSeriesFrame frame;
    frame.channels.assign(dataio::kCanonicalChannels.begin(), dataio::kCanonicalChannels.end());
    frame.time.resize(s.length);
    frame.values.assign(frame.channels.size(), std::vector<double>(s.length));
    frame.missing.assign(frame.channels.size(), std::vector<std::uint8_t>(s.length, 0));
    for (std::size_t t = 0; t < s.length; ++t) {
        const std::int64_t abs_hour = s.start_time + static_cast<std::int64_t>(t);
        frame.time[t] = abs_hour;
        frame.values[0][t] = co2[t];
        frame.values[1][t] = s.t_in[t];
        frame.values[2][t] = s.t_out[t];
        frame.values[3][t] = static_cast<double>(dataio::hour_of_day(abs_hour));
        frame.values[4][t] = static_cast<double>(dataio::weekday(abs_hour));
    }
    frame.validate();
    return frame;
}

dataio::TimeSeriesFrame inject_missingness(const dataio::TimeSeriesFrame& frame, double fraction,
                                           MissingMode mode, std::uint64_t seed,
                                           const std::vector<std::string>& channels,
                                           std::size_t range_begin, std::size_t range_end) {
    if (fraction < 0.0 || fraction > 1.0) {
        throw std::invalid_argument("inject_missingness: fraction must lie in [0, 1]");
    }
    const std::size_t n = frame.rows();
    range_end = std::min(range_end, n);
    if (range_begin > range_end) {
        throw std::invalid_argument("inject_missingness: empty placement range");
    }
    const std::size_t count = static_cast<std::size_t>(fraction * static_cast<double>(n));
    const std::size_t span = range_end - range_begin;
    if (count > span) {
        throw std::invalid_argument("inject_missingness: " + std::to_string(count) +
                                    " cells do not fit in the placement range");
    }

    dataio::TimeSeriesFrame out = frame;
    if (count == 0) return out;

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> rows;
    if (mode == MissingMode::ContiguousBlock) {
        std::uniform_int_distribution<std::size_t> start(range_begin, range_end - count);
        const std::size_t s = start(rng);
        rows.resize(count);
        for (std::size_t i = 0; i < count; ++i) rows[i] = s + i;
    } else {
        std::vector<std::size_t> pool(span);
        for (std::size_t i = 0; i < span; ++i) pool[i] = range_begin + i;
        for (std::size_t i = 0; i < count; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, span - 1);
            std::swap(pool[i], pool[pick(rng)]);
        }
        rows.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count));
    }

    for (const std::string& name : channels) {
        const std::size_t c = out.channel_index(name);
        for (std::size_t r : rows) out.missing[c][r] = 1;
    }
    return out;
}

}  // namespace piad::physics
