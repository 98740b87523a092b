#ifndef PCQA_CHECKPOINT_HPP
#define PCQA_CHECKPOINT_HPP

#include <optional>
#include <string>

#include "pcqa/adam.hpp"
#include "pcqa/model.hpp"

namespace pcqa {

// Versioned binary container of named parameter tensors, little-endian 64-bit
// reals, plus the optimizer moments when present. Hyperparameters and
// de-normalization bounds live in a JSON sidecar written by the trainer at
// `<path>.json`.
void save_checkpoint(const std::string& path, ModelParams& params,
                     const OptimizerState* optimizer = nullptr);

// Loads tensors by name into a freshly initialized ModelParams of the given
// config; missing or shape-mismatched tensors are an error.
ModelParams load_checkpoint(const std::string& path, const ModelConfig& config,
                            OptimizerState* optimizer = nullptr);

std::string serialize_checkpoint(ModelParams& params, const OptimizerState* optimizer);
ModelParams deserialize_checkpoint(const std::string& bytes, const ModelConfig& config,
                                   OptimizerState* optimizer);

}  // namespace pcqa

#endif  // PCQA_CHECKPOINT_HPP
