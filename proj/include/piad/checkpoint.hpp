#ifndef PIAD_CHECKPOINT_HPP
#define PIAD_CHECKPOINT_HPP

#include <stdexcept>
#include <string>
#include <variant>

#include "piad/baselines.hpp"
#include "piad/model.hpp"

namespace piad::model {

class CheckpointParseError : public std::runtime_error {
public:
    explicit CheckpointParseError(const std::string& what) : std::runtime_error(what) {}
};

class CheckpointVersionError : public std::runtime_error {
public:
    explicit CheckpointVersionError(const std::string& what) : std::runtime_error(what) {}
};

class CheckpointShapeError : public std::runtime_error {
public:
    explicit CheckpointShapeError(const std::string& what) : std::runtime_error(what) {}
};

enum class ModelType { PiadSrnn, PiSrnn, Linear, DLinear, VanillaRnn };

std::string to_string(ModelType type);
ModelType model_type_from_string(const std::string& name);

/// A trained model on disk: versioned JSON document of named parameter
/// arrays with explicit shapes, plus the full model configuration.
/// Round-trips every parameter bit-exactly.
struct Checkpoint {
    ModelType type = ModelType::PiadSrnn;
    ModelConfig config;
    std::variant<PiadParams, PiSrnnParams, baselines::LinearParams, baselines::DLinearParams,
                 baselines::VanillaRnnParams>
        params;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// Convenience pair for the composite model.
void save_checkpoint(const PiadParams& p, const ModelConfig& cfg, const std::string& path);

}  // namespace piad::model

#endif  // PIAD_CHECKPOINT_HPP
