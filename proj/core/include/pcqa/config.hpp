#ifndef PCQA_CONFIG_HPP
#define PCQA_CONFIG_HPP

#include <cstdint>
#include <string>

#include "pcqa/features.hpp"
#include "pcqa/model.hpp"
#include "pcqa/pcw_graph.hpp"

namespace pcqa {

struct TrainingConfig {
  double lr = 1e-4;
  int batch_size = 32;
  int epochs = 100;
  // epochs without a validation-PLCC improvement before stopping; 0 disables
  int patience = 20;
  uint64_t seed = 1;
  bool dropout_enabled = true;
  // stop once the epoch training loss drops below this (0 disables); not a
  // config-file key, used by capacity checks
  double stop_at_train_loss = 0.0;
};

// Everything a run needs, loadable from a sectioned key=value file (TOML
// subset: [section], key = value, # comments). Parsing is strict: an unknown
// section or key is an error, so hyperparameter typos cannot pass silently.
struct PipelineConfig {
  FeatureConfig feature;
  GraphConfig graph;
  GafConfig gaf;
  double gat_feat_dropout = 0.3;
  double gat_attn_dropout = 0.3;
  TrainingConfig training;
  int threads = 1;

  ModelConfig model() const {
    ModelConfig mc;
    mc.input_dim = static_cast<int>(kNodeFeatureDim);
    mc.gaf = gaf;
    mc.gat.feat_dropout = gat_feat_dropout;
    mc.gat.attn_dropout = gat_attn_dropout;
    return mc;
  }

  void validate() const;
  std::string to_toml() const;
  // Hash over the sections that shape graphs (feature, clustering, graph);
  // keys the graph cache and the predict-time compatibility check.
  uint64_t pipeline_fingerprint() const;
  // Hash that additionally covers the model section.
  uint64_t model_fingerprint() const;
};

PipelineConfig parse_pipeline_config(const std::string& toml_text);
PipelineConfig load_pipeline_config(const std::string& path);

// Applies `overlay` on top of `base` for every key present in the overlay
// text (flags > file > defaults is implemented by parsing the file into the
// defaults, then applying flag-derived lines).
void apply_config_lines(PipelineConfig& config, const std::string& toml_text);

}  // namespace pcqa

#endif  // PCQA_CONFIG_HPP
