#ifndef PIAD_CLI_HPP
#define PIAD_CLI_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "piad/model.hpp"
#include "piad/train.hpp"

namespace piad::cli {

/// Declarative description of one reproducible run; parsed from a JSON
/// config file, selectively overridable by flags.
struct RunConfig {
    int version = 1;

    std::string data_source = "simulate";  // "simulate" | "csv"
    std::string csv_path;
    std::size_t scenario_hours = 4096;
    double missing_fraction = 0.0;
    std::string missing_mode = "contiguous";  // "contiguous" | "random"
    std::vector<std::string> missing_channels = {"co2_in", "t_in", "t_out"};

    std::string model_type = "piad_srnn";
    model::ModelConfig model;
    train::TrainConfig train;

    std::array<double, 3> ratios = {0.6, 0.2, 0.2};
    bool missing_to_test = true;
    std::size_t stride = 1;
    std::vector<std::size_t> horizons = {96, 192, 336, 720};

    std::string out_dir = ".";
    std::uint64_t seed = 42;
};

RunConfig load_run_config(const std::string& path);

/// Entry point behind the `piad` binary. Returns the process exit code:
/// 0 success, 1 runtime failure, 2 usage or configuration error.
int run(int argc, const char* const* argv);

}  // namespace piad::cli

#endif  // PIAD_CLI_HPP
