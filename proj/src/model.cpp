#include "piad/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace piad::model {

void ModelConfig::validate() const {
    if (lookback == 0 || horizon == 0 || state_dim == 0) {
        throw std::invalid_argument("model config: lookback, horizon, and state_dim must be >= 1");
    }
    if (channels.empty()) throw std::invalid_argument("model config: no channels");
    if (std::find(channels.begin(), channels.end(), target_channel) == channels.end()) {
        throw std::invalid_argument("model config: target channel '" + target_channel +
                                    "' is not among the channels");
    }
    for (const std::string& d : decomposed_channels) {
        if (std::find(channels.begin(), channels.end(), d) == channels.end()) {
            throw std::invalid_argument("model config: decomposed channel '" + d +
                                        "' is not among the channels");
        }
    }
    if (kernel == 0) throw std::invalid_argument("model config: kernel must be >= 1");
}

namespace {

Tensor2 uniform_fan_in(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor2 m(rows, cols);
    for (double& v : m.data()) v = dist(rng);
    return m;
}

}  // namespace

PiadParams init_params(const ModelConfig& cfg) {
    cfg.validate();
    const std::size_t ds = cfg.state_dim;
    const std::size_t du = cfg.input_dim();
    std::mt19937_64 rng(cfg.seed);

    PiadParams p;
    p.kernel = cfg.kernel;
    p.seasonal.state_w = uniform_fan_in(ds, ds, rng);
    p.seasonal.state_b = Vector(ds, 0.0);
    p.seasonal.input_w = uniform_fan_in(du, ds, rng);
    p.seasonal.input_b = Vector(ds, 0.0);
    p.seasonal.out_w = uniform_fan_in(ds, cfg.horizon, rng);
    p.seasonal.out_b = Vector(cfg.horizon, 0.0);
    p.trend_w = uniform_fan_in(cfg.lookback, cfg.horizon, rng);
    p.trend_b = Vector(cfg.horizon, 0.0);
    return p;
}

StepResult pi_srnn_step(const Vector& state, const Vector& input, const PiSrnnParams& p,
                        bool identity_state_update, MacCounter* macs) {
    Vector pre = numerics::affine(state, p.state_w, p.state_b, macs);
    const Vector from_input = numerics::affine(input, p.input_w, p.input_b, macs);
    for (std::size_t i = 0; i < pre.size(); ++i) pre[i] += from_input[i];

    StepResult r;
    r.delta = numerics::relu(pre);
    r.next.resize(state.size());
    for (std::size_t i = 0; i < state.size(); ++i) r.next[i] = state[i] + r.delta[i];
    if (!identity_state_update) r.next = numerics::relu(r.next);
    return r;
}

StateTrace pi_srnn_encode(const std::vector<Vector>& inputs, const PiSrnnParams& p,
                          bool identity_state_update, MacCounter* macs) {
    if (inputs.empty()) throw std::invalid_argument("pi_srnn_encode: empty input sequence");
    StateTrace trace;
    trace.states.reserve(inputs.size() + 1);
    trace.deltas.reserve(inputs.size());
    trace.states.emplace_back(p.state_w.rows(), 0.0);
    for (const Vector& u : inputs) {
        StepResult r = pi_srnn_step(trace.states.back(), u, p, identity_state_update, macs);
        trace.deltas.push_back(std::move(r.delta));
        trace.states.push_back(std::move(r.next));
    }
    return trace;
}

Vector pi_srnn_forecast(const StateTrace& trace, const PiSrnnParams& p, MacCounter* macs) {
    if (trace.states.empty()) throw std::invalid_argument("pi_srnn_forecast: empty trace");
    return numerics::affine(trace.states.back(), p.out_w, p.out_b, macs);
}

PiadInputs assemble_piad_inputs(const Tensor2& window, const ModelConfig& cfg) {
    if (window.rows() != cfg.lookback || window.cols() != cfg.channels.size()) {
        throw std::invalid_argument("piad: window is " + window.shape_str() + ", expected " +
                                    std::to_string(cfg.lookback) + "x" +
                                    std::to_string(cfg.channels.size()));
    }
    const std::size_t n_ch = cfg.channels.size();
    std::vector<bool> decomposed(n_ch, false);
    std::size_t target = n_ch;
    for (std::size_t c = 0; c < n_ch; ++c) {
        if (cfg.channels[c] == cfg.target_channel) target = c;
        for (const std::string& d : cfg.decomposed_channels) {
            if (cfg.channels[c] == d) decomposed[c] = true;
        }
    }
    if (target == n_ch) {
        throw std::invalid_argument("piad: missing channel '" + cfg.target_channel + "'");
    }

    PiadInputs in;
    in.step_inputs.assign(cfg.lookback, Vector(n_ch, 0.0));
    for (std::size_t c = 0; c < n_ch; ++c) {
        Vector column(cfg.lookback);
        for (std::size_t t = 0; t < cfg.lookback; ++t) column[t] = window(t, c);
        if (decomposed[c]) {
            decompose::DecomposedSeries d = decompose::moving_average_decompose(column, cfg.kernel);
            if (c == target) in.target_trend = d.trend;
            for (std::size_t t = 0; t < cfg.lookback; ++t) in.step_inputs[t][c] = d.seasonal[t];
        } else {
            // Undecomposed target: the trend branch sees the raw column.
            if (c == target) in.target_trend = column;
            for (std::size_t t = 0; t < cfg.lookback; ++t) in.step_inputs[t][c] = column[t];
        }
    }
    return in;
}

PiadOutput piad_forward(const Tensor2& window, const PiadParams& p, const ModelConfig& cfg,
                        MacCounter* macs) {
    PiadInputs in = assemble_piad_inputs(window, cfg);

    PiadOutput out;
    out.trend_part = numerics::affine(in.target_trend, p.trend_w, p.trend_b, macs);
    const StateTrace trace =
        pi_srnn_encode(in.step_inputs, p.seasonal, cfg.identity_state_update, macs);
    out.seasonal_part = pi_srnn_forecast(trace, p.seasonal, macs);

    out.forecast.resize(out.trend_part.size());
    for (std::size_t i = 0; i < out.forecast.size(); ++i) {
        out.forecast[i] = out.trend_part[i] + out.seasonal_part[i];
    }
    return out;
}

std::size_t count_params(const PiadParams& p) {
    return p.seasonal.state_w.size() + p.seasonal.state_b.size() + p.seasonal.input_w.size() +
           p.seasonal.input_b.size() + p.seasonal.out_w.size() + p.seasonal.out_b.size() +
           p.trend_w.size() + p.trend_b.size();
}

std::size_t count_macs(const ModelConfig& cfg) {
    const std::size_t ds = cfg.state_dim;
    const std::size_t du = cfg.input_dim();
    return cfg.lookback * (ds * ds + du * ds) + ds * cfg.horizon + cfg.lookback * cfg.horizon;
}

}  // namespace piad::model
