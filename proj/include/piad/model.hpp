#ifndef PIAD_MODEL_HPP
#define PIAD_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "piad/decompose.hpp"
#include "piad/numerics.hpp"

namespace piad::model {

using numerics::MacCounter;
using numerics::Tensor2;
using numerics::Vector;

/**
 * Model hyperparameters shared by the state-space recurrent forecasters.
 *
 * The per-step input width equals the channel count: decomposed channels
 * enter as their seasonal component, the rest (calendar features) enter
 * as-is. All channels are expected pre-normalized.
 */
struct ModelConfig {
    std::size_t lookback = 96;   // L
    std::size_t horizon = 96;    // T
    std::size_t state_dim = 64;  // hidden state width
    std::string target_channel = "co2_in";
    std::vector<std::string> channels = {"co2_in", "t_in", "t_out", "hour", "num_week"};
    std::vector<std::string> decomposed_channels = {"co2_in", "t_in", "t_out"};
    std::size_t kernel = 24;     // decomposition window, hours
    bool identity_state_update = false;  // ablation: drop the outer ReLU of the state update
    std::uint64_t seed = 0;

    std::size_t input_dim() const { return channels.size(); }
    void validate() const;
};

/**
 * Weights of the state-space recurrent cell
 *
 *   delta  = relu(S * state_w + state_b + U * input_w + input_b)
 *   S_next = relu(S + delta)
 *
 * plus the direct multi-horizon readout S_L * out_w + out_b. Both
 * activations are ReLU; the outer one can be switched off via
 * ModelConfig::identity_state_update. state_w plays the role of the
 * mass-balance state matrix, input_w that of the input matrix.
 */
struct PiSrnnParams {
    Tensor2 state_w;  // d_s x d_s
    Vector state_b;   // d_s
    Tensor2 input_w;  // d_u x d_s
    Vector input_b;   // d_s
    Tensor2 out_w;    // d_s x T
    Vector out_b;     // T
};

/// The composite: linear trend branch plus recurrent seasonal branch,
/// summed. trend_w maps the target channel's look-back trend to the horizon.
struct PiadParams {
    PiSrnnParams seasonal;
    Tensor2 trend_w;  // L x T
    Vector trend_b;   // T
    std::size_t kernel = 24;
};

/// Full encode trace: states S_0..S_L and increments dS_1..dS_L. With both
/// activations ReLU and S_0 = 0 the states are componentwise non-negative
/// and non-decreasing.
struct StateTrace {
    std::vector<Vector> states;
    std::vector<Vector> deltas;
};

/// Weights uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) from the config seed,
/// biases zero; deterministic per seed.
PiadParams init_params(const ModelConfig& cfg);

struct StepResult {
    Vector delta;
    Vector next;
};

StepResult pi_srnn_step(const Vector& state, const Vector& input, const PiSrnnParams& p,
                        bool identity_state_update = false, MacCounter* macs = nullptr);

/// Runs the cell over the whole look-back starting from S_0 = 0.
StateTrace pi_srnn_encode(const std::vector<Vector>& inputs, const PiSrnnParams& p,
                          bool identity_state_update = false, MacCounter* macs = nullptr);

/// Direct multi-step readout from the final state.
Vector pi_srnn_forecast(const StateTrace& trace, const PiSrnnParams& p,
                        MacCounter* macs = nullptr);

/// Constant inputs of one composite forward pass: the target channel's trend
/// over the look-back and the assembled per-step input vectors.
struct PiadInputs {
    Vector target_trend;             // L
    std::vector<Vector> step_inputs; // L vectors of width input_dim
};

PiadInputs assemble_piad_inputs(const Tensor2& window, const ModelConfig& cfg);

struct PiadOutput {
    Vector forecast;       // trend_part + seasonal_part, exactly
    Vector trend_part;
    Vector seasonal_part;
};

PiadOutput piad_forward(const Tensor2& window, const PiadParams& p, const ModelConfig& cfg,
                        MacCounter* macs = nullptr);

/// Exact trainable-scalar count of the composite.
std::size_t count_params(const PiadParams& p);
/// Dense-layer multiplies of one forward pass:
/// L*(d_s^2 + d_u*d_s) + d_s*T + L*T.
std::size_t count_macs(const ModelConfig& cfg);

}  // namespace piad::model

#endif  // PIAD_MODEL_HPP
