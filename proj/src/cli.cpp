#include "piad/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <json.hpp>

#include "piad/checkpoint.hpp"
#include "piad/dataio.hpp"
#include "piad/evalsuite.hpp"
#include "piad/physics.hpp"

namespace piad::cli {

namespace {

using dataio::TimeSeriesFrame;
using dataio::WindowData;
using dataio::WindowSpec;
using nlohmann::json;

constexpr int kMetricsVersion = 1;

void merge_run_config(RunConfig& cfg, const json& j) {
    if (j.contains("version")) cfg.version = j.at("version").get<int>();
    if (cfg.version != 1) {
        throw std::invalid_argument("config: unsupported version " + std::to_string(cfg.version));
    }
    if (j.contains("data")) {
        const json& d = j.at("data");
        if (d.contains("source")) cfg.data_source = d.at("source").get<std::string>();
        if (d.contains("csv")) cfg.csv_path = d.at("csv").get<std::string>();
        if (d.contains("hours")) cfg.scenario_hours = d.at("hours").get<std::size_t>();
        if (d.contains("missing_fraction"))
            cfg.missing_fraction = d.at("missing_fraction").get<double>();
        if (d.contains("missing_mode")) cfg.missing_mode = d.at("missing_mode").get<std::string>();
        if (d.contains("missing_channels"))
            cfg.missing_channels = d.at("missing_channels").get<std::vector<std::string>>();
    }
    if (j.contains("model")) {
        const json& m = j.at("model");
        if (m.contains("type")) cfg.model_type = m.at("type").get<std::string>();
        if (m.contains("lookback")) cfg.model.lookback = m.at("lookback").get<std::size_t>();
        if (m.contains("horizon")) cfg.model.horizon = m.at("horizon").get<std::size_t>();
        if (m.contains("state_dim")) cfg.model.state_dim = m.at("state_dim").get<std::size_t>();
        if (m.contains("target_channel"))
            cfg.model.target_channel = m.at("target_channel").get<std::string>();
        if (m.contains("channels"))
            cfg.model.channels = m.at("channels").get<std::vector<std::string>>();
        if (m.contains("decomposed_channels"))
            cfg.model.decomposed_channels =
                m.at("decomposed_channels").get<std::vector<std::string>>();
        if (m.contains("kernel")) cfg.model.kernel = m.at("kernel").get<std::size_t>();
        if (m.contains("identity_state_update"))
            cfg.model.identity_state_update = m.at("identity_state_update").get<bool>();
    }
    if (j.contains("train")) {
        const json& t = j.at("train");
        if (t.contains("learning_rate")) cfg.train.learning_rate = t.at("learning_rate").get<double>();
        if (t.contains("batch_size")) cfg.train.batch_size = t.at("batch_size").get<std::size_t>();
        if (t.contains("max_epochs")) cfg.train.max_epochs = t.at("max_epochs").get<std::size_t>();
        if (t.contains("patience")) cfg.train.patience = t.at("patience").get<std::size_t>();
        if (t.contains("beta1")) cfg.train.beta1 = t.at("beta1").get<double>();
        if (t.contains("beta2")) cfg.train.beta2 = t.at("beta2").get<double>();
        if (t.contains("epsilon")) cfg.train.epsilon = t.at("epsilon").get<double>();
    }
    if (j.contains("split")) {
        const json& s = j.at("split");
        if (s.contains("ratios")) {
            const auto r = s.at("ratios").get<std::vector<double>>();
            if (r.size() != 3) throw std::invalid_argument("config: split.ratios needs 3 entries");
            cfg.ratios = {r[0], r[1], r[2]};
        }
        if (s.contains("missing_to_test")) cfg.missing_to_test = s.at("missing_to_test").get<bool>();
        if (s.contains("stride")) cfg.stride = s.at("stride").get<std::size_t>();
    }
    if (j.contains("horizons")) cfg.horizons = j.at("horizons").get<std::vector<std::size_t>>();
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();

    if (cfg.horizons.empty()) throw std::invalid_argument("config: horizons must be non-empty");
    for (std::size_t h : cfg.horizons) {
        if (h == 0) throw std::invalid_argument("config: every horizon must be >= 1");
    }
}

void apply_seed(RunConfig& cfg) {
    cfg.model.seed = cfg.seed;
    cfg.train.seed = cfg.seed;
}

TimeSeriesFrame load_frame(const RunConfig& cfg) {
    TimeSeriesFrame frame;
    if (cfg.data_source == "csv") {
        if (cfg.csv_path.empty()) throw std::invalid_argument("config: data.csv path missing");
        frame = dataio::read_csv(cfg.csv_path);
    } else if (cfg.data_source == "simulate") {
        const physics::Scenario s = physics::office_scenario(cfg.scenario_hours, cfg.seed);
        frame = physics::generate_scenario(s);
        if (cfg.missing_fraction > 0.0) {
            const auto mode = cfg.missing_mode == "random" ? physics::MissingMode::Random
                                                           : physics::MissingMode::ContiguousBlock;
            // Blocks land in the chronological tail so the missing-to-test
            // split policy keeps a usable training range.
            const std::size_t tail = frame.rows() -
                static_cast<std::size_t>(cfg.missing_fraction * static_cast<double>(frame.rows()));
            frame = physics::inject_missingness(frame, cfg.missing_fraction, mode, cfg.seed,
                                                cfg.missing_channels,
                                                std::min(tail, frame.rows() * 3 / 4), frame.rows());
        }
    } else {
        throw std::invalid_argument("config: unknown data source '" + cfg.data_source + "'");
    }
    return frame;
}

std::vector<WindowData> clean_windows(const TimeSeriesFrame& raw, const TimeSeriesFrame& normalized,
                                      const WindowSpec& spec, dataio::IndexRange range,
                                      const std::string& target_channel) {
    const std::size_t target = raw.channel_index(target_channel);
    std::vector<WindowData> out;
    for (const dataio::WindowRef& ref : dataio::make_windows(raw, spec, range, target_channel)) {
        if (ref.masked_input || ref.masked_target) continue;
        out.push_back(dataio::materialize_window(normalized, ref, spec, target));
    }
    if (out.empty()) {
        throw std::runtime_error("no usable windows in range [" + std::to_string(range.begin) +
                                 ", " + std::to_string(range.end) + ")");
    }
    return out;
}

void write_json(const json& doc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

json horizon_entry(std::size_t horizon, const evalsuite::MetricsReport& r) {
    return json{{"T", horizon},         {"mse", r.mse},
                {"mae", r.mae},         {"mse_ppm", r.mse_ppm},
                {"mae_ppm", r.mae_ppm}, {"window_count", r.window_count}};
}

json events_entry(const evalsuite::EventReport& r, double threshold) {
    return json{{"tp", r.tp},
                {"fp", r.fp},
                {"tn", r.tn},
                {"fn", r.fn},
                {"accuracy", r.accuracy},
                {"precision", r.precision},
                {"recall", r.recall},
                {"f1", r.f1},
                {"threshold_ppm", threshold}};
}

struct PreparedData {
    TimeSeriesFrame raw;
    TimeSeriesFrame normalized;
    dataio::SplitPlan split;
    dataio::Normalizer normalizer;
    std::size_t target = 0;
};

PreparedData prepare(const RunConfig& cfg, std::size_t horizon) {
    PreparedData d;
    d.raw = load_frame(cfg);
    d.split = dataio::chronological_split(d.raw, cfg.ratios, cfg.missing_to_test,
                                          cfg.model.lookback + horizon);
    d.normalizer = dataio::fit_normalizer(d.raw, d.split.train);
    d.normalized = dataio::apply_normalizer(d.normalizer, d.raw);
    d.target = d.raw.channel_index(cfg.model.target_channel);
    return d;
}

int cmd_simulate(const RunConfig& cfg, const std::string& out_path) {
    const TimeSeriesFrame frame = load_frame(cfg);
    dataio::write_csv(frame, out_path);
    std::cout << "wrote " << frame.rows() << " rows to " << out_path << "\n";
    return 0;
}

int cmd_train(const RunConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);

    json doc = {{"version", kMetricsVersion}, {"model", cfg.model_type}};
    json horizons = json::array();

    for (std::size_t horizon : cfg.horizons) {
        model::ModelConfig mcfg = cfg.model;
        mcfg.horizon = horizon;
        const PreparedData d = prepare(cfg, horizon);
        const WindowSpec spec{mcfg.lookback, horizon, cfg.stride};

        const auto train_windows =
            clean_windows(d.raw, d.normalized, spec, d.split.train, mcfg.target_channel);
        const auto val_windows =
            clean_windows(d.raw, d.normalized, spec, d.split.val, mcfg.target_channel);
        const auto test_windows =
            clean_windows(d.raw, d.normalized, spec, d.split.test, mcfg.target_channel);

        auto modelp = train::make_model(model::model_type_from_string(cfg.model_type), mcfg);
        const train::FitResult fitres = train::fit(*modelp, train_windows, val_windows, cfg.train);
        const evalsuite::MetricsReport report =
            evalsuite::evaluate_forecast(*modelp, test_windows, d.normalizer, d.target);

        const std::string ckpt_path =
            cfg.out_dir + "/checkpoint_t" + std::to_string(horizon) + ".json";
        model::save_checkpoint(modelp->checkpoint(), ckpt_path);

        json entry = horizon_entry(horizon, report);
        entry["val_mse"] = fitres.best_val;
        entry["best_epoch"] = fitres.best_epoch;
        entry["epochs_run"] = fitres.epochs_run;
        entry["train_loss"] = fitres.train_loss;
        entry["val_loss"] = fitres.val_loss;
        horizons.push_back(entry);

        std::cout << cfg.model_type << " T=" << horizon << ": test mse " << report.mse
                  << ", mae " << report.mae << " (val " << fitres.best_val << ", "
                  << fitres.epochs_run << " epochs) -> " << ckpt_path << "\n";

        std::size_t params = 0;
        for (const auto& slot : modelp->param_slots()) params += slot.size;
        numerics::MacCounter macs;
        modelp->forecast(test_windows.front(), &macs);
        doc["efficiency"] = {{"params", params}, {"macs", macs.multiplies}};
    }
    doc["horizons"] = horizons;

    const std::string metrics_path = cfg.out_dir + "/metrics.json";
    write_json(doc, metrics_path);
    std::cout << "wrote " << metrics_path << "\n";
    return 0;
}

int cmd_forecast(const RunConfig& cfg, const std::string& ckpt_path) {
    std::filesystem::create_directories(cfg.out_dir);
    const model::Checkpoint ckpt = model::load_checkpoint(ckpt_path);
    const auto modelp = train::make_model(ckpt);

    RunConfig run = cfg;
    run.model = ckpt.config;
    const PreparedData d = prepare(run, ckpt.config.horizon);
    const WindowSpec spec{ckpt.config.lookback, ckpt.config.horizon, cfg.stride};
    const auto test_windows =
        clean_windows(d.raw, d.normalized, spec, d.split.test, ckpt.config.target_channel);

    const evalsuite::MetricsReport report =
        evalsuite::evaluate_forecast(*modelp, test_windows, d.normalizer, d.target);

    std::size_t params = 0;
    for (const auto& slot : modelp->param_slots()) params += slot.size;
    numerics::MacCounter macs;
    modelp->forecast(test_windows.front(), &macs);

    const json doc = {{"version", kMetricsVersion},
                      {"model", modelp->name()},
                      {"horizons", json::array({horizon_entry(ckpt.config.horizon, report)})},
                      {"efficiency", {{"params", params}, {"macs", macs.multiplies}}}};
    const std::string metrics_path = cfg.out_dir + "/metrics.json";
    write_json(doc, metrics_path);
    std::cout << modelp->name() << " T=" << ckpt.config.horizon << ": test mse " << report.mse
              << ", mae " << report.mae << " over " << report.window_count << " windows\n"
              << "wrote " << metrics_path << "\n";
    return 0;
}

int cmd_impute(const RunConfig& cfg, const std::string& ckpt_path, bool mean_fallback) {
    std::filesystem::create_directories(cfg.out_dir);
    const model::Checkpoint ckpt = model::load_checkpoint(ckpt_path);
    const auto modelp = train::make_model(ckpt);

    RunConfig run = cfg;
    run.model = ckpt.config;
    const PreparedData d = prepare(run, ckpt.config.horizon);

    const evalsuite::ImputationResult result = evalsuite::impute_series(
        *modelp, d.raw, d.normalizer, ckpt.config.target_channel, mean_fallback);

    const std::string out_path = cfg.out_dir + "/imputed.csv";
    dataio::write_csv(result.frame, out_path);
    std::cout << "filled " << result.imputed_rows.size() << " masked "
              << ckpt.config.target_channel << " cells, wrote " << out_path << "\n";
    return 0;
}

int cmd_events(const RunConfig& cfg, const std::string& ckpt_path) {
    std::filesystem::create_directories(cfg.out_dir);
    const model::Checkpoint ckpt = model::load_checkpoint(ckpt_path);
    const auto modelp = train::make_model(ckpt);

    RunConfig run = cfg;
    run.model = ckpt.config;
    const PreparedData d = prepare(run, ckpt.config.horizon);

    const std::size_t target = d.target;
    numerics::Vector train_ppm;
    for (std::size_t t = d.split.train.begin; t < d.split.train.end; ++t) {
        if (!d.raw.missing[target][t]) train_ppm.push_back(d.raw.values[target][t]);
    }
    const evalsuite::EventThreshold th = evalsuite::event_threshold(train_ppm);
    const evalsuite::EventReport report = evalsuite::event_pipeline(
        *modelp, d.raw, d.split, d.normalizer, ckpt.config.target_channel);

    const json doc = {{"version", kMetricsVersion},
                      {"model", modelp->name()},
                      {"events", events_entry(report, th.threshold)}};
    const std::string metrics_path = cfg.out_dir + "/metrics.json";
    write_json(doc, metrics_path);
    std::cout << "threshold " << th.threshold << " ppm; tp " << report.tp << " fp " << report.fp
              << " tn " << report.tn << " fn " << report.fn << "; f1 " << report.f1 << "\n"
              << "wrote " << metrics_path << "\n";
    return 0;
}

int cmd_bench(const RunConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
    model::ModelConfig mcfg = cfg.model;
    mcfg.horizon = cfg.horizons.front();
    auto modelp = train::make_model(model::model_type_from_string(cfg.model_type), mcfg);

    // Synthetic normalized window; bench does not need data.
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    WindowData w;
    w.inputs = numerics::Tensor2(mcfg.lookback, mcfg.channels.size());
    for (double& v : w.inputs.data()) v = dist(rng);
    w.target.assign(mcfg.horizon, 0.0);

    std::size_t params = 0;
    for (const auto& slot : modelp->param_slots()) params += slot.size;
    numerics::MacCounter macs;
    modelp->forecast(w, &macs);

    constexpr int kRuns = 5;
    double total_ms = 0.0;
    for (int i = 0; i < kRuns; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        volatile double sink = modelp->forecast(w).front();
        (void)sink;
        total_ms +=
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
    }
    const double latency = total_ms / kRuns;

    // Rough resident footprint: parameters plus one forward's activations.
    const std::size_t ds = mcfg.state_dim;
    const std::size_t memory_bytes =
        8 * (params + mcfg.lookback * mcfg.channels.size() + (mcfg.lookback + 1) * ds +
             mcfg.lookback * ds + 2 * mcfg.horizon);

    const json doc = {{"version", kMetricsVersion},
                      {"model", cfg.model_type},
                      {"efficiency",
                       {{"params", params},
                        {"macs", macs.multiplies},
                        {"latency_ms_mean", latency},
                        {"memory_bytes", memory_bytes}}}};
    const std::string metrics_path = cfg.out_dir + "/bench.json";
    write_json(doc, metrics_path);
    std::cout << cfg.model_type << ": params " << params << ", macs " << macs.multiplies
              << ", latency " << latency << " ms (mean of " << kRuns << "), memory ~"
              << memory_bytes << " bytes\nwrote " << metrics_path << "\n";
    return 0;
}

int cmd_gradcheck(const RunConfig& cfg, double tolerance) {
    // Fixed small geometry: central differences lose precision once the
    // untrained recurrence makes the loss large, so the check probes the
    // gradient path on a model small enough for the stencil.
    model::ModelConfig mcfg = cfg.model;
    mcfg.lookback = 16;
    mcfg.horizon = 4;
    mcfg.state_dim = 8;
    mcfg.kernel = 8;
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    WindowData w;
    w.inputs = numerics::Tensor2(mcfg.lookback, mcfg.channels.size());
    for (double& v : w.inputs.data()) v = dist(rng);
    w.target.resize(mcfg.horizon);
    for (double& v : w.target) v = dist(rng);

    auto modelp = train::make_model(model::model_type_from_string(cfg.model_type), mcfg);
    const train::GradCheckReport report = train::gradcheck(*modelp, w);
    std::cout << cfg.model_type << " gradcheck: max relative error " << report.max_rel_error
              << " (" << report.checked << " checked, " << report.skipped << " skipped";
    if (!report.worst_param.empty()) std::cout << ", worst " << report.worst_param;
    std::cout << ")\n";
    if (report.max_rel_error >= tolerance) {
        std::cerr << "gradcheck failed tolerance " << tolerance << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument("config '" + path + "': " + e.what());
    }
    RunConfig cfg;
    try {
        merge_run_config(cfg, j);
    } catch (const json::exception& e) {
        throw std::invalid_argument("config '" + path + "': " + e.what());
    }
    return cfg;
}

int run(int argc, const char* const* argv) {
    CLI::App app{"physics-informed state-space RNN forecasting toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_override, data_override, ckpt_path;
    std::uint64_t seed_override = 0;
    bool seed_given = false;
    std::size_t horizon_override = 0;
    double tolerance = 1e-4;
    bool mean_fallback = false;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration");
        sub->add_option("--out", out_override, "output directory or file");
        sub->add_option("--data", data_override, "input CSV (overrides the config data source)");
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t s) { seed_override = s; seed_given = true; },
            "master seed override");
        sub->add_option("--horizon", horizon_override, "single horizon override");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic scenario CSV");
    CLI::App* train_cmd = app.add_subcommand("train", "train a model per configured horizon");
    CLI::App* forecast = app.add_subcommand("forecast", "evaluate a checkpoint on the test split");
    CLI::App* impute = app.add_subcommand("impute", "fill masked target cells with one-step forecasts");
    CLI::App* events = app.add_subcommand("events", "outlier-event classification over the test split");
    CLI::App* bench = app.add_subcommand("bench", "parameter/MAC counts and inference latency");
    CLI::App* gradcheck_cmd = app.add_subcommand("gradcheck", "finite-difference gradient check");
    for (CLI::App* sub : {simulate, train_cmd, forecast, impute, events, bench, gradcheck_cmd}) {
        add_common(sub);
    }
    for (CLI::App* sub : {forecast, impute, events}) {
        sub->add_option("--checkpoint", ckpt_path, "trained model checkpoint")->required();
    }
    impute->add_flag("--fallback-mean", mean_fallback,
                     "fill masked cells in the first lookback rows with the training mean");
    gradcheck_cmd->add_option("--tol", tolerance, "maximum relative error accepted");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_run_config(config_path);
        if (seed_given) cfg.seed = seed_override;
        if (!data_override.empty()) {
            cfg.data_source = "csv";
            cfg.csv_path = data_override;
        }
        if (horizon_override > 0) cfg.horizons = {horizon_override};
        apply_seed(cfg);

        if (simulate->parsed()) {
            const std::string out = out_override.empty() ? "data.csv" : out_override;
            return cmd_simulate(cfg, out);
        }
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (train_cmd->parsed()) return cmd_train(cfg);
        if (forecast->parsed()) return cmd_forecast(cfg, ckpt_path);
        if (impute->parsed()) return cmd_impute(cfg, ckpt_path, mean_fallback);
        if (events->parsed()) return cmd_events(cfg, ckpt_path);
        if (bench->parsed()) return cmd_bench(cfg);
        if (gradcheck_cmd->parsed()) return cmd_gradcheck(cfg, tolerance);
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace piad::cli
