#include "piad/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "piad/baselines.hpp"
#include "piad/decompose.hpp"

namespace piad::train {

using model::Checkpoint;
using model::ModelConfig;
using model::ModelType;
using numerics::MacCounter;
using numerics::Tensor2;

double mse(const Vector& pred, const Vector& target) {
    if (pred.size() != target.size()) {
        throw std::invalid_argument("mse: lengths differ, " + std::to_string(pred.size()) +
                                    " vs " + std::to_string(target.size()));
    }
    if (pred.empty()) throw std::invalid_argument("mse: empty vectors");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        s += d * d;
    }
    return s / static_cast<double>(pred.size());
}

double mae(const Vector& pred, const Vector& target) {
    if (pred.size() != target.size()) {
        throw std::invalid_argument("mae: lengths differ, " + std::to_string(pred.size()) +
                                    " vs " + std::to_string(target.size()));
    }
    if (pred.empty()) throw std::invalid_argument("mae: empty vectors");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - target[i]);
    return s / static_cast<double>(pred.size());
}

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw std::invalid_argument("train config: learning rate must be > 0");
    if (batch_size == 0) throw std::invalid_argument("train config: batch size must be >= 1");
    if (patience == 0) throw std::invalid_argument("train config: patience must be >= 1");
    if (beta1 <= 0.0 || beta1 >= 1.0 || beta2 <= 0.0 || beta2 >= 1.0) {
        throw std::invalid_argument("train config: betas must lie in (0, 1)");
    }
    if (max_grad_norm < 0.0) {
        throw std::invalid_argument("train config: max_grad_norm must be >= 0");
    }
}

void adam_step(const std::vector<ParamSlot>& params, const std::vector<double>& grads,
               AdamState& state, const TrainConfig& cfg) {
    std::size_t total = 0;
    for (const ParamSlot& s : params) total += s.size;
    if (grads.size() != total || state.m.size() != total) {
        throw std::invalid_argument("adam_step: gradient/state size does not match parameters");
    }
    for (double g : grads) {
        if (!std::isfinite(g)) {
            throw numerics::NonFiniteError("adam_step: non-finite gradient, step aborted");
        }
    }
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double corr1 = 1.0 - std::pow(cfg.beta1, t);
    const double corr2 = 1.0 - std::pow(cfg.beta2, t);
    std::size_t k = 0;
    for (const ParamSlot& s : params) {
        for (std::size_t i = 0; i < s.size; ++i, ++k) {
            state.m[k] = cfg.beta1 * state.m[k] + (1.0 - cfg.beta1) * grads[k];
            state.v[k] = cfg.beta2 * state.v[k] + (1.0 - cfg.beta2) * grads[k] * grads[k];
            const double mhat = state.m[k] / corr1;
            const double vhat = state.v[k] / corr2;
            s.data[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
        }
    }
}

// ---------------------------------------------------------------------------
// Model adapters
// ---------------------------------------------------------------------------

namespace {

std::size_t channel_index(const ModelConfig& cfg, const std::string& name) {
    for (std::size_t i = 0; i < cfg.channels.size(); ++i) {
        if (cfg.channels[i] == name) return i;
    }
    throw std::invalid_argument("model: missing channel '" + name + "'");
}

Vector window_column(const WindowData& w, std::size_t channel) {
    Vector col(w.inputs.rows());
    for (std::size_t t = 0; t < col.size(); ++t) col[t] = w.inputs(t, channel);
    return col;
}

std::vector<Vector> window_rows(const WindowData& w) {
    std::vector<Vector> rows(w.inputs.rows(), Vector(w.inputs.cols()));
    for (std::size_t t = 0; t < w.inputs.rows(); ++t) {
        for (std::size_t c = 0; c < w.inputs.cols(); ++c) rows[t][c] = w.inputs(t, c);
    }
    return rows;
}

// Records the recurrent cell on the tape; mirrors pi_srnn_step exactly.
GradTape::ValId tape_srnn_rollout(GradTape& tape, const std::vector<Vector>& inputs,
                                  bool identity_state_update, GradTape::ValId state_w,
                                  GradTape::ValId state_b, GradTape::ValId input_w,
                                  GradTape::ValId input_b, std::size_t state_dim) {
    GradTape::ValId s = tape.vec_const(Vector(state_dim, 0.0));
    for (const Vector& u : inputs) {
        const GradTape::ValId u_id = tape.vec_const(u);
        const GradTape::ValId pre =
            tape.add(tape.affine(s, state_w, state_b), tape.affine(u_id, input_w, input_b));
        const GradTape::ValId delta = tape.relu(pre);
        const GradTape::ValId next = tape.add(s, delta);
        s = identity_state_update ? next : tape.relu(next);
    }
    return s;
}

class PiadModel final : public ForecastModel {
public:
    PiadModel(ModelConfig cfg, model::PiadParams params)
        : cfg_(std::move(cfg)), params_(std::move(params)) {}

    std::string name() const override { return "piad_srnn"; }
    std::size_t lookback() const override { return cfg_.lookback; }
    std::size_t horizon() const override { return cfg_.horizon; }

    std::vector<ParamSlot> param_slots() override {
        model::PiSrnnParams& s = params_.seasonal;
        return {{"state_w", s.state_w.data().data(), s.state_w.size()},
                {"state_b", s.state_b.data(), s.state_b.size()},
                {"input_w", s.input_w.data().data(), s.input_w.size()},
                {"input_b", s.input_b.data(), s.input_b.size()},
                {"out_w", s.out_w.data().data(), s.out_w.size()},
                {"out_b", s.out_b.data(), s.out_b.size()},
                {"trend_w", params_.trend_w.data().data(), params_.trend_w.size()},
                {"trend_b", params_.trend_b.data(), params_.trend_b.size()}};
    }

    Vector forecast(const WindowData& w, MacCounter* macs) const override {
        return model::piad_forward(w.inputs, params_, cfg_, macs).forecast;
    }

    TapeLoss build_loss(GradTape& tape, const WindowData& w) const override {
        const model::PiadInputs in = model::assemble_piad_inputs(w.inputs, cfg_);
        const model::PiSrnnParams& p = params_.seasonal;

        TapeLoss tl;
        const GradTape::ValId state_w = tape.mat_leaf(p.state_w);
        const GradTape::ValId state_b = tape.vec_leaf(p.state_b);
        const GradTape::ValId input_w = tape.mat_leaf(p.input_w);
        const GradTape::ValId input_b = tape.vec_leaf(p.input_b);
        const GradTape::ValId out_w = tape.mat_leaf(p.out_w);
        const GradTape::ValId out_b = tape.vec_leaf(p.out_b);
        const GradTape::ValId trend_w = tape.mat_leaf(params_.trend_w);
        const GradTape::ValId trend_b = tape.vec_leaf(params_.trend_b);

        const GradTape::ValId trend_part =
            tape.affine(tape.vec_const(in.target_trend), trend_w, trend_b);
        const GradTape::ValId last = tape_srnn_rollout(tape, in.step_inputs,
                                                       cfg_.identity_state_update, state_w,
                                                       state_b, input_w, input_b, cfg_.state_dim);
        const GradTape::ValId seasonal_part = tape.affine(last, out_w, out_b);
        const GradTape::ValId yhat = tape.add(trend_part, seasonal_part);
        tl.loss = tape.mse(yhat, w.target);
        tl.leaves = {state_w, state_b, input_w, input_b, out_w, out_b, trend_w, trend_b};
        tl.leaf_is_matrix = {true, false, true, false, true, false, true, false};
        return tl;
    }

    Checkpoint checkpoint() const override {
        return {ModelType::PiadSrnn, cfg_, params_};
    }

    const model::PiadParams& params() const { return params_; }

private:
    ModelConfig cfg_;
    model::PiadParams params_;
};

class PiSrnnModel final : public ForecastModel {
public:
    PiSrnnModel(ModelConfig cfg, model::PiSrnnParams params)
        : cfg_(std::move(cfg)), params_(std::move(params)) {}

    std::string name() const override { return "pi_srnn"; }
    std::size_t lookback() const override { return cfg_.lookback; }
    std::size_t horizon() const override { return cfg_.horizon; }

    std::vector<ParamSlot> param_slots() override {
        return {{"state_w", params_.state_w.data().data(), params_.state_w.size()},
                {"state_b", params_.state_b.data(), params_.state_b.size()},
                {"input_w", params_.input_w.data().data(), params_.input_w.size()},
                {"input_b", params_.input_b.data(), params_.input_b.size()},
                {"out_w", params_.out_w.data().data(), params_.out_w.size()},
                {"out_b", params_.out_b.data(), params_.out_b.size()}};
    }

    Vector forecast(const WindowData& w, MacCounter* macs) const override {
        const model::StateTrace trace =
            model::pi_srnn_encode(window_rows(w), params_, cfg_.identity_state_update, macs);
        return model::pi_srnn_forecast(trace, params_, macs);
    }

    TapeLoss build_loss(GradTape& tape, const WindowData& w) const override {
        TapeLoss tl;
        const GradTape::ValId state_w = tape.mat_leaf(params_.state_w);
        const GradTape::ValId state_b = tape.vec_leaf(params_.state_b);
        const GradTape::ValId input_w = tape.mat_leaf(params_.input_w);
        const GradTape::ValId input_b = tape.vec_leaf(params_.input_b);
        const GradTape::ValId out_w = tape.mat_leaf(params_.out_w);
        const GradTape::ValId out_b = tape.vec_leaf(params_.out_b);

        const GradTape::ValId last = tape_srnn_rollout(tape, window_rows(w),
                                                       cfg_.identity_state_update, state_w,
                                                       state_b, input_w, input_b, cfg_.state_dim);
        tl.loss = tape.mse(tape.affine(last, out_w, out_b), w.target);
        tl.leaves = {state_w, state_b, input_w, input_b, out_w, out_b};
        tl.leaf_is_matrix = {true, false, true, false, true, false};
        return tl;
    }

    Checkpoint checkpoint() const override { return {ModelType::PiSrnn, cfg_, params_}; }

private:
    ModelConfig cfg_;
    model::PiSrnnParams params_;
};

class LinearModel final : public ForecastModel {
public:
    LinearModel(ModelConfig cfg, baselines::LinearParams params)
        : cfg_(std::move(cfg)), params_(std::move(params)),
          target_(channel_index(cfg_, cfg_.target_channel)) {}

    std::string name() const override { return "linear"; }
    std::size_t lookback() const override { return cfg_.lookback; }
    std::size_t horizon() const override { return cfg_.horizon; }

    std::vector<ParamSlot> param_slots() override {
        return {{"w", params_.w.data().data(), params_.w.size()},
                {"b", params_.b.data(), params_.b.size()}};
    }

    Vector forecast(const WindowData& w, MacCounter* macs) const override {
        return baselines::linear_forecast(window_column(w, target_), params_, macs);
    }

    TapeLoss build_loss(GradTape& tape, const WindowData& w) const override {
        TapeLoss tl;
        const GradTape::ValId wt = tape.mat_leaf(params_.w);
        const GradTape::ValId b = tape.vec_leaf(params_.b);
        const GradTape::ValId yhat = tape.affine(tape.vec_const(window_column(w, target_)), wt, b);
        tl.loss = tape.mse(yhat, w.target);
        tl.leaves = {wt, b};
        tl.leaf_is_matrix = {true, false};
        return tl;
    }

    Checkpoint checkpoint() const override { return {ModelType::Linear, cfg_, params_}; }

private:
    ModelConfig cfg_;
    baselines::LinearParams params_;
    std::size_t target_;
};

class DLinearModel final : public ForecastModel {
public:
    DLinearModel(ModelConfig cfg, baselines::DLinearParams params)
        : cfg_(std::move(cfg)), params_(std::move(params)),
          target_(channel_index(cfg_, cfg_.target_channel)) {}

    std::string name() const override { return "dlinear"; }
    std::size_t lookback() const override { return cfg_.lookback; }
    std::size_t horizon() const override { return cfg_.horizon; }

    std::vector<ParamSlot> param_slots() override {
        return {{"trend_w", params_.trend.w.data().data(), params_.trend.w.size()},
                {"trend_b", params_.trend.b.data(), params_.trend.b.size()},
                {"seasonal_w", params_.seasonal.w.data().data(), params_.seasonal.w.size()},
                {"seasonal_b", params_.seasonal.b.data(), params_.seasonal.b.size()}};
    }

    Vector forecast(const WindowData& w, MacCounter* macs) const override {
        return baselines::dlinear_forward(window_column(w, target_), params_, macs);
    }

    TapeLoss build_loss(GradTape& tape, const WindowData& w) const override {
        const decompose::DecomposedSeries d =
            decompose::moving_average_decompose(window_column(w, target_), params_.kernel);
        TapeLoss tl;
        const GradTape::ValId tw = tape.mat_leaf(params_.trend.w);
        const GradTape::ValId tb = tape.vec_leaf(params_.trend.b);
        const GradTape::ValId sw = tape.mat_leaf(params_.seasonal.w);
        const GradTape::ValId sb = tape.vec_leaf(params_.seasonal.b);
        const GradTape::ValId yhat = tape.add(tape.affine(tape.vec_const(d.trend), tw, tb),
                                              tape.affine(tape.vec_const(d.seasonal), sw, sb));
        tl.loss = tape.mse(yhat, w.target);
        tl.leaves = {tw, tb, sw, sb};
        tl.leaf_is_matrix = {true, false, true, false};
        return tl;
    }

    Checkpoint checkpoint() const override { return {ModelType::DLinear, cfg_, params_}; }

private:
    ModelConfig cfg_;
    baselines::DLinearParams params_;
    std::size_t target_;
};

class VanillaRnnModel final : public ForecastModel {
public:
    VanillaRnnModel(ModelConfig cfg, baselines::VanillaRnnParams params)
        : cfg_(std::move(cfg)), params_(std::move(params)) {}

    std::string name() const override { return "vanilla_rnn"; }
    std::size_t lookback() const override { return cfg_.lookback; }
    std::size_t horizon() const override { return cfg_.horizon; }

    std::vector<ParamSlot> param_slots() override {
        return {{"hh_w", params_.hh_w.data().data(), params_.hh_w.size()},
                {"xh_w", params_.xh_w.data().data(), params_.xh_w.size()},
                {"h_b", params_.h_b.data(), params_.h_b.size()},
                {"out_w", params_.out_w.data().data(), params_.out_w.size()},
                {"out_b", params_.out_b.data(), params_.out_b.size()}};
    }

    Vector forecast(const WindowData& w, MacCounter* macs) const override {
        return baselines::vanilla_rnn_forward(window_rows(w), params_, macs);
    }

    TapeLoss build_loss(GradTape& tape, const WindowData& w) const override {
        TapeLoss tl;
        const GradTape::ValId hh_w = tape.mat_leaf(params_.hh_w);
        const GradTape::ValId xh_w = tape.mat_leaf(params_.xh_w);
        const GradTape::ValId h_b = tape.vec_leaf(params_.h_b);
        const GradTape::ValId out_w = tape.mat_leaf(params_.out_w);
        const GradTape::ValId out_b = tape.vec_leaf(params_.out_b);

        GradTape::ValId h = tape.vec_const(Vector(params_.hh_w.rows(), 0.0));
        for (const Vector& x : window_rows(w)) {
            const GradTape::ValId pre =
                tape.add(tape.affine(h, hh_w, h_b), tape.vecmat(tape.vec_const(x), xh_w));
            h = tape.tanh(pre);
        }
        tl.loss = tape.mse(tape.affine(h, out_w, out_b), w.target);
        tl.leaves = {hh_w, xh_w, h_b, out_w, out_b};
        tl.leaf_is_matrix = {true, true, false, true, false};
        return tl;
    }

    Checkpoint checkpoint() const override { return {ModelType::VanillaRnn, cfg_, params_}; }

private:
    ModelConfig cfg_;
    baselines::VanillaRnnParams params_;
};

class PersistenceModel final : public ForecastModel {
public:
    explicit PersistenceModel(ModelConfig cfg)
        : cfg_(std::move(cfg)), target_(channel_index(cfg_, cfg_.target_channel)) {}

    std::string name() const override { return "persistence"; }
    std::size_t lookback() const override { return cfg_.lookback; }
    std::size_t horizon() const override { return cfg_.horizon; }

    std::vector<ParamSlot> param_slots() override { return {}; }

    Vector forecast(const WindowData& w, MacCounter*) const override {
        return baselines::persistence_forecast(window_column(w, target_), cfg_.horizon);
    }

    TapeLoss build_loss(GradTape&, const WindowData&) const override {
        throw std::logic_error("persistence has no trainable parameters");
    }

    Checkpoint checkpoint() const override {
        throw std::logic_error("persistence has no checkpointable parameters");
    }

private:
    ModelConfig cfg_;
    std::size_t target_;
};

}  // namespace

std::unique_ptr<ForecastModel> make_model(ModelType type, const ModelConfig& cfg) {
    cfg.validate();
    switch (type) {
        case ModelType::PiadSrnn:
            return std::make_unique<PiadModel>(cfg, model::init_params(cfg));
        case ModelType::PiSrnn: {
            // The composite initializer draws the shared cell first.
            model::PiadParams p = model::init_params(cfg);
            return std::make_unique<PiSrnnModel>(cfg, std::move(p.seasonal));
        }
        case ModelType::Linear:
            return std::make_unique<LinearModel>(
                cfg, baselines::init_linear(cfg.lookback, cfg.horizon, cfg.seed));
        case ModelType::DLinear:
            return std::make_unique<DLinearModel>(
                cfg, baselines::init_dlinear(cfg.lookback, cfg.horizon, cfg.kernel, cfg.seed));
        case ModelType::VanillaRnn:
            return std::make_unique<VanillaRnnModel>(
                cfg, baselines::init_vanilla_rnn(cfg.input_dim(), cfg.state_dim, cfg.horizon,
                                                 cfg.seed));
    }
    throw std::logic_error("unknown model type");
}

std::unique_ptr<ForecastModel> make_model(const Checkpoint& ckpt) {
    switch (ckpt.type) {
        case ModelType::PiadSrnn:
            return std::make_unique<PiadModel>(ckpt.config, std::get<model::PiadParams>(ckpt.params));
        case ModelType::PiSrnn:
            return std::make_unique<PiSrnnModel>(ckpt.config,
                                                 std::get<model::PiSrnnParams>(ckpt.params));
        case ModelType::Linear:
            return std::make_unique<LinearModel>(
                ckpt.config, std::get<baselines::LinearParams>(ckpt.params));
        case ModelType::DLinear:
            return std::make_unique<DLinearModel>(
                ckpt.config, std::get<baselines::DLinearParams>(ckpt.params));
        case ModelType::VanillaRnn:
            return std::make_unique<VanillaRnnModel>(
                ckpt.config, std::get<baselines::VanillaRnnParams>(ckpt.params));
    }
    throw std::logic_error("unknown model type");
}

std::unique_ptr<ForecastModel> make_persistence(const ModelConfig& cfg) {
    return std::make_unique<PersistenceModel>(cfg);
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

namespace {

void collect_grads(const GradTape& tape, const TapeLoss& tl, std::vector<double>& grads) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < tl.leaves.size(); ++i) {
        if (tl.leaf_is_matrix[i]) {
            const Tensor2& g = tape.mat_grad(tl.leaves[i]);
            for (double v : g.data()) grads[k++] += v;
        } else {
            const Vector& g = tape.vec_grad(tl.leaves[i]);
            for (double v : g) grads[k++] += v;
        }
    }
}

double validation_loss(const ForecastModel& model, const std::vector<WindowData>& val_set) {
    double total = 0.0;
    for (const WindowData& w : val_set) total += mse(model.forecast(w), w.target);
    return total / static_cast<double>(val_set.size());
}

}  // namespace

FitResult fit(ForecastModel& model, const std::vector<WindowData>& train_set,
              const std::vector<WindowData>& val_set, const TrainConfig& cfg) {
    cfg.validate();
    if (train_set.empty() || val_set.empty()) {
        throw std::invalid_argument("fit: train and validation window sets must be non-empty");
    }

    std::vector<ParamSlot> slots = model.param_slots();
    std::size_t total = 0;
    for (const ParamSlot& s : slots) total += s.size;
    if (total == 0) throw std::invalid_argument("fit: model has no trainable parameters");

    AdamState state(total);
    std::vector<double> grads(total, 0.0);
    std::vector<double> best(total, 0.0);

    FitResult result;
    result.best_val = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;

    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    GradTape tape;
    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        // Fisher-Yates draw for this epoch's batch order.
        for (std::size_t i = order.size(); i > 1; --i) {
            std::uniform_int_distribution<std::size_t> pick(0, i - 1);
            std::swap(order[i - 1], order[pick(rng)]);
        }

        double epoch_loss = 0.0;
        try {
            for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
                const std::size_t end = std::min(begin + cfg.batch_size, order.size());
                std::fill(grads.begin(), grads.end(), 0.0);
                for (std::size_t k = begin; k < end; ++k) {
                    tape.reset();
                    const TapeLoss tl = model.build_loss(tape, train_set[order[k]]);
                    tape.backward(tl.loss);
                    collect_grads(tape, tl, grads);
                    epoch_loss += tape.scalar(tl.loss);
                }
                const double inv = 1.0 / static_cast<double>(end - begin);
                for (double& g : grads) g *= inv;
                if (cfg.max_grad_norm > 0.0) {
                    double sq = 0.0;
                    for (double g : grads) sq += g * g;
                    const double norm = std::sqrt(sq);
                    if (norm > cfg.max_grad_norm) {
                        const double scale = cfg.max_grad_norm / norm;
                        for (double& g : grads) g *= scale;
                    }
                }
                adam_step(slots, grads, state, cfg);
            }
        } catch (const numerics::NonFiniteError& e) {
            throw std::runtime_error("fit: diverged at epoch " + std::to_string(epoch) + ": " +
                                     e.what());
        }

        const double train_loss = epoch_loss / static_cast<double>(train_set.size());
        const double val_loss = validation_loss(model, val_set);
        if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) {
            throw std::runtime_error("fit: diverged at epoch " + std::to_string(epoch) +
                                     ": non-finite loss");
        }
        result.train_loss.push_back(train_loss);
        result.val_loss.push_back(val_loss);
        result.epochs_run = epoch;

        if (val_loss < result.best_val) {
            result.best_val = val_loss;
            result.best_epoch = epoch;
            since_best = 0;
            std::size_t k = 0;
            for (const ParamSlot& s : slots) {
                std::copy(s.data, s.data + s.size, best.begin() + static_cast<std::ptrdiff_t>(k));
                k += s.size;
            }
        } else {
            ++since_best;
            if (since_best >= cfg.patience) break;
        }
    }

    // Hand back the best-validation parameters.
    std::size_t k = 0;
    for (const ParamSlot& s : slots) {
        std::copy(best.begin() + static_cast<std::ptrdiff_t>(k),
                  best.begin() + static_cast<std::ptrdiff_t>(k + s.size), s.data);
        k += s.size;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Gradient check
// ---------------------------------------------------------------------------

double central_difference(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

GradCheckReport gradcheck(ForecastModel& model, const WindowData& w, double kink_tol, double h) {
    std::vector<ParamSlot> slots = model.param_slots();

    GradTape tape;
    TapeLoss tl = model.build_loss(tape, w);
    tape.backward(tl.loss);

    std::vector<double> analytic;
    for (std::size_t i = 0; i < tl.leaves.size(); ++i) {
        if (tl.leaf_is_matrix[i]) {
            const Tensor2& g = tape.mat_grad(tl.leaves[i]);
            analytic.insert(analytic.end(), g.data().begin(), g.data().end());
        } else {
            const Vector& g = tape.vec_grad(tl.leaves[i]);
            analytic.insert(analytic.end(), g.begin(), g.end());
        }
    }

    const auto loss_and_preacts = [&](std::vector<double>& preacts) {
        GradTape t;
        const TapeLoss l = model.build_loss(t, w);
        preacts = t.relu_preactivations();
        return t.scalar(l.loss);
    };

    GradCheckReport report;
    std::size_t flat = 0;
    std::vector<double> pre_plus, pre_minus;
    for (const ParamSlot& s : slots) {
        for (std::size_t i = 0; i < s.size; ++i, ++flat) {
            const double saved = s.data[i];
            s.data[i] = saved + h;
            const double loss_plus = loss_and_preacts(pre_plus);
            s.data[i] = saved - h;
            const double loss_minus = loss_and_preacts(pre_minus);
            s.data[i] = saved;

            bool near_kink = false;
            for (std::size_t k = 0; k < pre_plus.size(); ++k) {
                // A pre-activation the perturbation does not move is safe even
                // at exactly zero (the state update often sits there by
                // construction). One that moves must stay on one side of the
                // kink, clear of the tolerance band.
                if (pre_plus[k] == pre_minus[k]) continue;
                if ((pre_plus[k] > 0.0) != (pre_minus[k] > 0.0) ||
                    std::abs(pre_plus[k]) < kink_tol || std::abs(pre_minus[k]) < kink_tol) {
                    near_kink = true;
                    break;
                }
            }
            if (near_kink) {
                ++report.skipped;
                continue;
            }

            const double fd = (loss_plus - loss_minus) / (2.0 * h);
            const double g = analytic[flat];
            // The 1e-4 floor keeps finite-difference noise from dominating
            // the ratio where the true gradient is essentially zero.
            const double rel = std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), 1e-4});
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = s.name + "[" + std::to_string(i) + "]";
            }
            ++report.checked;
        }
    }
    return report;
}

}  // namespace piad::train
