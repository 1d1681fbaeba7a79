#ifndef PIAD_PHYSICS_HPP
#define PIAD_PHYSICS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "piad/dataio.hpp"
#include "piad/numerics.hpp"

namespace piad::physics {

using numerics::Vector;

/**
 * Inputs of the indoor CO2 mass balance
 *
 *   dC/dt = (mdot / (rho * V)) * (co2_out - C) + g(t)
 *
 * with C in ppm and the source term g = M_t/rho configured directly in
 * ppm/h. co2_out and generation are hourly profiles, treated as constant
 * within each hour; a single entry means "constant for the whole run".
 */
struct PhysicsConfig {
    double mdot = 210.0;     // mass flow rate, kg/h
    double rho = 1.2;        // air density, kg/m^3
    double volume = 250.0;   // room volume, m^3
    Vector co2_out = {420.0};    // outdoor concentration, ppm, per hour
    Vector generation = {0.0};   // source term M_t/rho, ppm/h, per hour
    double step = 0.05;      // integration step, h

    /// Ventilation rate constant mdot/(rho*V), 1/h.
    double air_change_rate() const { return mdot / (rho * volume); }
    void validate(std::size_t hours) const;
};

/// Integrates the mass balance with classical fixed-step RK4 and returns
/// hourly samples: result[k] = C at the end of hour k.
Vector simulate_co2(const PhysicsConfig& cfg, double c0, std::size_t hours);

/// Algebraic fixed point co2_out + g / air_change_rate for constant inputs.
/// Throws for mdot == 0 (no finite steady state) or non-constant profiles.
double steady_state(const PhysicsConfig& cfg);

/// A synthetic office recording: occupancy drives the CO2 source term, the
/// remaining channels are plausible covariates.
struct Scenario {
    std::size_t length = 0;          // hours
    std::vector<double> occupancy;   // people per hour
    double per_person_ppm_h = 72.0;  // source strength of one occupant
    Vector co2_out;                  // ppm per hour
    Vector t_in;                     // degC per hour
    Vector t_out;                    // degC per hour
    std::int64_t start_time = 0;     // hours since epoch
    double initial_co2 = 420.0;      // ppm
    double noise_ppm = 0.0;          // observation noise std on co2_in
    std::uint64_t seed = 0;
    PhysicsConfig physics;

    void validate() const;
};

/// Weekday 9:00-17:00 occupancy with per-day headcount jitter and occasional
/// meetings, seasonal outdoor temperature, mild indoor climate control.
/// Deterministic per seed. Starts on a Monday at midnight.
Scenario office_scenario(std::size_t hours, std::uint64_t seed);

/// Simulates the scenario and assembles the canonical five-channel frame
/// (no missing cells).
dataio::TimeSeriesFrame generate_scenario(const Scenario& s);

enum class MissingMode { ContiguousBlock, Random };

/**
 * Masks exactly floor(fraction * rows) cells in each of the chosen channels.
 * ContiguousBlock masks one block whose placement is drawn from the seed;
 * Random draws that many distinct rows. Placement is restricted to
 * [range_begin, range_end) when given (default: the whole frame).
 */
dataio::TimeSeriesFrame inject_missingness(
    const dataio::TimeSeriesFrame& frame, double fraction, MissingMode mode, std::uint64_t seed,
    const std::vector<std::string>& channels = {"co2_in", "t_in", "t_out"},
    std::size_t range_begin = 0, std::size_t range_end = SIZE_MAX);

}  // namespace piad::physics

#endif  // PIAD_PHYSICS_HPP
