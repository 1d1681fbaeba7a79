#include "piad/baselines.hpp"

#include <cmath>
#include <random>

#include "piad/decompose.hpp"

namespace piad::baselines {

namespace {

Tensor2 uniform_fan_in(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor2 m(rows, cols);
    for (double& v : m.data()) v = dist(rng);
    return m;
}

}  // namespace

LinearParams init_linear(std::size_t lookback, std::size_t horizon, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return {uniform_fan_in(lookback, horizon, rng), Vector(horizon, 0.0)};
}

DLinearParams init_dlinear(std::size_t lookback, std::size_t horizon, std::size_t kernel,
                           std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    DLinearParams p;
    p.trend = {uniform_fan_in(lookback, horizon, rng), Vector(horizon, 0.0)};
    p.seasonal = {uniform_fan_in(lookback, horizon, rng), Vector(horizon, 0.0)};
    p.kernel = kernel;
    return p;
}

VanillaRnnParams init_vanilla_rnn(std::size_t input_dim, std::size_t state_dim,
                                  std::size_t horizon, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    VanillaRnnParams p;
    p.hh_w = uniform_fan_in(state_dim, state_dim, rng);
    p.xh_w = uniform_fan_in(input_dim, state_dim, rng);
    p.h_b = Vector(state_dim, 0.0);
    p.out_w = uniform_fan_in(state_dim, horizon, rng);
    p.out_b = Vector(horizon, 0.0);
    return p;
}

Vector persistence_forecast(const Vector& target_window, std::size_t horizon) {
    if (target_window.empty()) {
        throw std::invalid_argument("persistence_forecast: empty window");
    }
    return Vector(horizon, target_window.back());
}

Vector linear_forecast(const Vector& target_window, const LinearParams& p, MacCounter* macs) {
    return numerics::affine(target_window, p.w, p.b, macs);
}

Vector dlinear_forward(const Vector& target_window, const DLinearParams& p, MacCounter* macs) {
    const decompose::DecomposedSeries d =
        decompose::moving_average_decompose(target_window, p.kernel);
    const Vector trend_part = numerics::affine(d.trend, p.trend.w, p.trend.b, macs);
    const Vector seasonal_part = numerics::affine(d.seasonal, p.seasonal.w, p.seasonal.b, macs);
    Vector out(trend_part.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = trend_part[i] + seasonal_part[i];
    return out;
}

Vector vanilla_rnn_forward(const std::vector<Vector>& inputs, const VanillaRnnParams& p,
                           MacCounter* macs) {
    if (inputs.empty()) throw std::invalid_argument("vanilla_rnn_forward: empty input sequence");
    Vector h(p.hh_w.rows(), 0.0);
    for (const Vector& x : inputs) {
        Vector pre = numerics::affine(h, p.hh_w, p.h_b, macs);
        const Vector from_input = numerics::affine(x, p.xh_w, Vector(p.xh_w.cols(), 0.0), macs);
        for (std::size_t i = 0; i < pre.size(); ++i) pre[i] = std::tanh(pre[i] + from_input[i]);
        h = std::move(pre);
    }
    return numerics::affine(h, p.out_w, p.out_b, macs);
}

}  // namespace piad::baselines
