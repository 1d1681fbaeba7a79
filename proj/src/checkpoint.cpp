#include "piad/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace piad::model {

namespace {

using nlohmann::json;

constexpr int kCheckpointVersion = 1;

json tensor_to_json(const Tensor2& m) {
    return json{{"shape", {m.rows(), m.cols()}}, {"data", m.data()}};
}

json vector_to_json(const Vector& v) {
    return json{{"shape", {v.size()}}, {"data", v}};
}

Tensor2 tensor_from_json(const json& j, const std::string& name, std::size_t rows,
                         std::size_t cols) {
    if (!j.contains(name)) throw CheckpointShapeError("checkpoint: missing parameter '" + name + "'");
    const json& entry = j.at(name);
    const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 2 || shape[0] != rows || shape[1] != cols) {
        throw CheckpointShapeError("checkpoint: parameter '" + name + "' expected shape " +
                                   std::to_string(rows) + "x" + std::to_string(cols));
    }
    auto data = entry.at("data").get<std::vector<double>>();
    if (data.size() != rows * cols) {
        throw CheckpointShapeError("checkpoint: parameter '" + name + "' data length " +
                                   std::to_string(data.size()) + " does not match its shape");
    }
    Tensor2 m(rows, cols);
    m.data() = std::move(data);
    return m;
}

Vector vector_from_json(const json& j, const std::string& name, std::size_t len) {
    if (!j.contains(name)) throw CheckpointShapeError("checkpoint: missing parameter '" + name + "'");
    const json& entry = j.at(name);
    const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 1 || shape[0] != len) {
        throw CheckpointShapeError("checkpoint: parameter '" + name + "' expected length " +
                                   std::to_string(len));
    }
    auto data = entry.at("data").get<Vector>();
    if (data.size() != len) {
        throw CheckpointShapeError("checkpoint: parameter '" + name + "' data length " +
                                   std::to_string(data.size()) + " does not match its shape");
    }
    return data;
}

json config_to_json(const ModelConfig& cfg) {
    return json{{"lookback", cfg.lookback},
                {"horizon", cfg.horizon},
                {"state_dim", cfg.state_dim},
                {"target_channel", cfg.target_channel},
                {"channels", cfg.channels},
                {"decomposed_channels", cfg.decomposed_channels},
                {"kernel", cfg.kernel},
                {"identity_state_update", cfg.identity_state_update},
                {"seed", cfg.seed}};
}

ModelConfig config_from_json(const json& j) {
    ModelConfig cfg;
    cfg.lookback = j.at("lookback").get<std::size_t>();
    cfg.horizon = j.at("horizon").get<std::size_t>();
    cfg.state_dim = j.at("state_dim").get<std::size_t>();
    cfg.target_channel = j.at("target_channel").get<std::string>();
    cfg.channels = j.at("channels").get<std::vector<std::string>>();
    cfg.decomposed_channels = j.at("decomposed_channels").get<std::vector<std::string>>();
    cfg.kernel = j.at("kernel").get<std::size_t>();
    cfg.identity_state_update = j.at("identity_state_update").get<bool>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
}

json srnn_params_to_json(const PiSrnnParams& p) {
    return json{{"state_w", tensor_to_json(p.state_w)}, {"state_b", vector_to_json(p.state_b)},
                {"input_w", tensor_to_json(p.input_w)}, {"input_b", vector_to_json(p.input_b)},
                {"out_w", tensor_to_json(p.out_w)},     {"out_b", vector_to_json(p.out_b)}};
}

PiSrnnParams srnn_params_from_json(const json& j, const ModelConfig& cfg) {
    const std::size_t ds = cfg.state_dim;
    const std::size_t du = cfg.input_dim();
    PiSrnnParams p;
    p.state_w = tensor_from_json(j, "state_w", ds, ds);
    p.state_b = vector_from_json(j, "state_b", ds);
    p.input_w = tensor_from_json(j, "input_w", du, ds);
    p.input_b = vector_from_json(j, "input_b", ds);
    p.out_w = tensor_from_json(j, "out_w", ds, cfg.horizon);
    p.out_b = vector_from_json(j, "out_b", cfg.horizon);
    return p;
}

}  // namespace

std::string to_string(ModelType type) {
    switch (type) {
        case ModelType::PiadSrnn: return "piad_srnn";
        case ModelType::PiSrnn: return "pi_srnn";
        case ModelType::Linear: return "linear";
        case ModelType::DLinear: return "dlinear";
        case ModelType::VanillaRnn: return "vanilla_rnn";
    }
    throw std::logic_error("unknown model type");
}

ModelType model_type_from_string(const std::string& name) {
    if (name == "piad_srnn") return ModelType::PiadSrnn;
    if (name == "pi_srnn") return ModelType::PiSrnn;
    if (name == "linear") return ModelType::Linear;
    if (name == "dlinear") return ModelType::DLinear;
    if (name == "vanilla_rnn") return ModelType::VanillaRnn;
    throw std::invalid_argument("unknown model type '" + name + "'");
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    json params;
    switch (ckpt.type) {
        case ModelType::PiadSrnn: {
            const auto& p = std::get<PiadParams>(ckpt.params);
            params = srnn_params_to_json(p.seasonal);
            params["trend_w"] = tensor_to_json(p.trend_w);
            params["trend_b"] = vector_to_json(p.trend_b);
            break;
        }
        case ModelType::PiSrnn:
            params = srnn_params_to_json(std::get<PiSrnnParams>(ckpt.params));
            break;
        case ModelType::Linear: {
            const auto& p = std::get<baselines::LinearParams>(ckpt.params);
            params = json{{"w", tensor_to_json(p.w)}, {"b", vector_to_json(p.b)}};
            break;
        }
        case ModelType::DLinear: {
            const auto& p = std::get<baselines::DLinearParams>(ckpt.params);
            params = json{{"trend_w", tensor_to_json(p.trend.w)},
                          {"trend_b", vector_to_json(p.trend.b)},
                          {"seasonal_w", tensor_to_json(p.seasonal.w)},
                          {"seasonal_b", vector_to_json(p.seasonal.b)}};
            break;
        }
        case ModelType::VanillaRnn: {
            const auto& p = std::get<baselines::VanillaRnnParams>(ckpt.params);
            params = json{{"hh_w", tensor_to_json(p.hh_w)}, {"xh_w", tensor_to_json(p.xh_w)},
                          {"h_b", vector_to_json(p.h_b)},   {"out_w", tensor_to_json(p.out_w)},
                          {"out_b", vector_to_json(p.out_b)}};
            break;
        }
    }

    const json doc = {{"version", kCheckpointVersion},
                      {"model", to_string(ckpt.type)},
                      {"config", config_to_json(ckpt.config)},
                      {"params", params}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CheckpointParseError("cannot open '" + path + "' for reading");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw CheckpointParseError("checkpoint '" + path + "': " + e.what());
    }

    try {
        if (!doc.contains("version") || !doc.at("version").is_number_integer()) {
            throw CheckpointVersionError("checkpoint '" + path + "': missing version field");
        }
        const int version = doc.at("version").get<int>();
        if (version != kCheckpointVersion) {
            throw CheckpointVersionError("checkpoint '" + path + "': version " +
                                         std::to_string(version) + ", expected " +
                                         std::to_string(kCheckpointVersion));
        }

        Checkpoint ckpt;
        ckpt.type = model_type_from_string(doc.at("model").get<std::string>());
        ckpt.config = config_from_json(doc.at("config"));
        const ModelConfig& cfg = ckpt.config;
        const json& params = doc.at("params");
        switch (ckpt.type) {
            case ModelType::PiadSrnn: {
                PiadParams p;
                p.seasonal = srnn_params_from_json(params, cfg);
                p.trend_w = tensor_from_json(params, "trend_w", cfg.lookback, cfg.horizon);
                p.trend_b = vector_from_json(params, "trend_b", cfg.horizon);
                p.kernel = cfg.kernel;
                ckpt.params = std::move(p);
                break;
            }
            case ModelType::PiSrnn:
                ckpt.params = srnn_params_from_json(params, cfg);
                break;
            case ModelType::Linear: {
                baselines::LinearParams p;
                p.w = tensor_from_json(params, "w", cfg.lookback, cfg.horizon);
                p.b = vector_from_json(params, "b", cfg.horizon);
                ckpt.params = std::move(p);
                break;
            }
            case ModelType::DLinear: {
                baselines::DLinearParams p;
                p.trend.w = tensor_from_json(params, "trend_w", cfg.lookback, cfg.horizon);
                p.trend.b = vector_from_json(params, "trend_b", cfg.horizon);
                p.seasonal.w = tensor_from_json(params, "seasonal_w", cfg.lookback, cfg.horizon);
                p.seasonal.b = vector_from_json(params, "seasonal_b", cfg.horizon);
                p.kernel = cfg.kernel;
                ckpt.params = std::move(p);
                break;
            }
            case ModelType::VanillaRnn: {
                baselines::VanillaRnnParams p;
                const std::size_t ds = cfg.state_dim;
                p.hh_w = tensor_from_json(params, "hh_w", ds, ds);
                p.xh_w = tensor_from_json(params, "xh_w", cfg.input_dim(), ds);
                p.h_b = vector_from_json(params, "h_b", ds);
                p.out_w = tensor_from_json(params, "out_w", ds, cfg.horizon);
                p.out_b = vector_from_json(params, "out_b", cfg.horizon);
                ckpt.params = std::move(p);
                break;
            }
        }
        return ckpt;
    } catch (const CheckpointVersionError&) {
        throw;
    } catch (const CheckpointShapeError&) {
        throw;
    } catch (const json::exception& e) {
        throw CheckpointParseError("checkpoint '" + path + "': " + e.what());
    }
}

void save_checkpoint(const PiadParams& p, const ModelConfig& cfg, const std::string& path) {
    Checkpoint ckpt;
    ckpt.type = ModelType::PiadSrnn;
    ckpt.config = cfg;
    ckpt.params = p;
    save_checkpoint(ckpt, path);
}

}  // namespace piad::model
