#ifndef PIAD_TRAIN_HPP
#define PIAD_TRAIN_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "piad/checkpoint.hpp"
#include "piad/dataio.hpp"
#include "piad/model.hpp"
#include "piad/numerics.hpp"

namespace piad::train {

using dataio::WindowData;
using numerics::GradTape;
using numerics::Vector;

double mse(const Vector& pred, const Vector& target);
double mae(const Vector& pred, const Vector& target);

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 100;
    std::size_t patience = 10;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    // Global gradient-norm ceiling applied before the Adam update; the
    // unrolled recurrence produces enormous gradients at fresh
    // initializations. 0 disables it.
    double max_grad_norm = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Named view into one parameter tensor of a model.
struct ParamSlot {
    std::string name;
    double* data = nullptr;
    std::size_t size = 0;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t step = 0;

    explicit AdamState(std::size_t total) : m(total, 0.0), v(total, 0.0) {}
};

/// One bias-corrected Adam update over the flattened parameter set.
/// Throws if any gradient entry is non-finite; the step is then not applied.
void adam_step(const std::vector<ParamSlot>& params, const std::vector<double>& grads,
               AdamState& state, const TrainConfig& cfg);

/// Loss node plus the tape leaves holding each parameter slot, in
/// param_slots() order.
struct TapeLoss {
    GradTape::ValId loss = 0;
    std::vector<GradTape::ValId> leaves;
    std::vector<bool> leaf_is_matrix;
};

/**
 * Uniform training/inference surface over the forecasters in this
 * repository. forecast() is the eager path; build_loss() records the same
 * computation on a tape so reverse-mode gradients flow through the full
 * unrolled recurrence. The two paths agree bitwise.
 */
class ForecastModel {
public:
    virtual ~ForecastModel() = default;

    virtual std::string name() const = 0;
    virtual std::size_t lookback() const = 0;
    virtual std::size_t horizon() const = 0;

    virtual std::vector<ParamSlot> param_slots() = 0;
    virtual Vector forecast(const WindowData& w, numerics::MacCounter* macs = nullptr) const = 0;
    virtual TapeLoss build_loss(GradTape& tape, const WindowData& w) const = 0;

    virtual model::Checkpoint checkpoint() const = 0;
};

/// Fresh model with seeded initial weights.
std::unique_ptr<ForecastModel> make_model(model::ModelType type, const model::ModelConfig& cfg);
/// Model restored from a checkpoint.
std::unique_ptr<ForecastModel> make_model(const model::Checkpoint& ckpt);
/// The untrainable floor: repeats the window's last target value.
std::unique_ptr<ForecastModel> make_persistence(const model::ModelConfig& cfg);

struct FitResult {
    std::vector<double> train_loss;  // per epoch
    std::vector<double> val_loss;    // per epoch
    double best_val = 0.0;
    std::size_t best_epoch = 0;  // 1-based
    std::size_t epochs_run = 0;
};

/**
 * Minimizes window MSE with Adam over shuffled mini-batches, early-stops
 * after `patience` epochs without validation improvement, and restores the
 * best-validation parameters before returning. Deterministic for a fixed
 * (seed, data, config). Throws with the epoch index if the loss diverges.
 */
FitResult fit(ForecastModel& model, const std::vector<WindowData>& train_set,
              const std::vector<WindowData>& val_set, const TrainConfig& cfg);

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;
    std::string worst_param;
};

/**
 * Compares reverse-mode gradients of the window MSE against central finite
 * differences (step h) for every parameter. Parameters whose perturbation
 * crosses or lands within kink_tol of a ReLU kink are skipped.
 */
GradCheckReport gradcheck(ForecastModel& model, const WindowData& w, double kink_tol = 1e-6,
                          double h = 1e-5);

/// Central difference (f(x+h) - f(x-h)) / 2h.
double central_difference(const std::function<double(double)>& f, double x, double h);

}  // namespace piad::train

#endif  // PIAD_TRAIN_HPP
