#ifndef PIAD_BASELINES_HPP
#define PIAD_BASELINES_HPP

#include <cstdint>
#include <vector>

#include "piad/numerics.hpp"

namespace piad::baselines {

using numerics::MacCounter;
using numerics::Tensor2;
using numerics::Vector;

/// Direct linear map from the target look-back to the horizon.
struct LinearParams {
    Tensor2 w;  // L x T
    Vector b;   // T
};

/// Two linear branches over the moving-average decomposition of the window.
struct DLinearParams {
    LinearParams trend;
    LinearParams seasonal;
    std::size_t kernel = 24;
};

/// Plain tanh recurrence with a direct multi-step readout.
struct VanillaRnnParams {
    Tensor2 hh_w;  // d_s x d_s
    Tensor2 xh_w;  // d_u x d_s
    Vector h_b;    // d_s
    Tensor2 out_w; // d_s x T
    Vector out_b;  // T
};

LinearParams init_linear(std::size_t lookback, std::size_t horizon, std::uint64_t seed);
DLinearParams init_dlinear(std::size_t lookback, std::size_t horizon, std::size_t kernel,
                           std::uint64_t seed);
VanillaRnnParams init_vanilla_rnn(std::size_t input_dim, std::size_t state_dim,
                                  std::size_t horizon, std::uint64_t seed);

/// Repeats the last observed value; the reproducibility floor.
Vector persistence_forecast(const Vector& target_window, std::size_t horizon);

Vector linear_forecast(const Vector& target_window, const LinearParams& p,
                       MacCounter* macs = nullptr);

Vector dlinear_forward(const Vector& target_window, const DLinearParams& p,
                       MacCounter* macs = nullptr);

/// h_{t+1} = tanh(h_t*hh_w + x_t*xh_w + h_b), h_0 = 0; readout from h_L.
Vector vanilla_rnn_forward(const std::vector<Vector>& inputs, const VanillaRnnParams& p,
                           MacCounter* macs = nullptr);

}  // namespace piad::baselines

#endif  // PIAD_BASELINES_HPP
