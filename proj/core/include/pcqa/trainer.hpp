#ifndef PCQA_TRAINER_HPP
#define PCQA_TRAINER_HPP

#include <string>
#include <vector>

#include "pcqa/checkpoint.hpp"
#include "pcqa/manifest.hpp"
#include "pcqa/metrics.hpp"
#include "pcqa/pipeline.hpp"
#include "pcqa/split.hpp"

namespace pcqa {

double mse_loss(const std::vector<double>& preds, const std::vector<double>& targets);

struct TrainSample {
  ModelGraph graph;
  double target = 0.0;  // normalized to [0,1]
  double mos = 0.0;     // native scale, for evaluation
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_plcc = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  int best_epoch = -1;
  double best_val_plcc = 0.0;
  std::string checkpoint_path;
  uint64_t seed = 0;
  size_t n_train = 0, n_val = 0, n_test = 0;
  // measured but intentionally left out of the serialized report, which must
  // be byte-identical across reruns of the same seed
  double wall_clock_seconds = 0.0;

  std::string to_json(const std::string& config_toml) const;
};

struct TrainResult {
  ModelParams params;
  OptimizerState optimizer;
  TrainReport report;
};

// Core loop over prebuilt graphs: MSE loss, Adam, one optimizer step per
// batch (last short batch kept), per-epoch validation PLCC, best-epoch
// snapshot, optional patience-based early stop. Deterministic for a fixed
// seed; per-sample backward passes may run on `threads` threads with the
// gradient reduction always in sample order.
TrainResult train_on_samples(const std::vector<TrainSample>& train_set,
                             const std::vector<TrainSample>& val_set,
                             const PipelineConfig& config, uint64_t seed, int threads);

// Manifest-driven wrapper: resolves cloud paths, builds graphs through the
// cache (parallel across clouds), splits by reference id, trains, and fills
// n_train/n_val/n_test.
TrainResult train(const DatasetManifest& manifest, const std::string& manifest_path,
                  const PipelineConfig& config, const std::string& cache_dir, int threads,
                  SplitPlan* plan_out = nullptr);

// Sidecar metadata stored beside a checkpoint as <checkpoint>.json.
struct CheckpointSidecar {
  std::string config_toml;
  double mos_min = 0.0;
  double mos_max = 1.0;
  uint64_t pipeline_fingerprint = 0;
  uint64_t seed = 0;
  int best_epoch = -1;

  std::string to_json() const;
  static CheckpointSidecar from_json(const std::string& text);
};

void write_sidecar(const std::string& checkpoint_path, const CheckpointSidecar& sidecar);
CheckpointSidecar read_sidecar(const std::string& checkpoint_path);

// Full inference path: PLY -> graph (cache-aware) -> GAF/GAT -> score mapped
// back to MOS units via the training-time range.
double predict_cloud(const std::string& checkpoint_path, const std::string& cloud_path,
                     const PipelineConfig* override_config, const std::string& cache_dir,
                     int threads);

// Normalized score for an already-built graph.
double predict_graph(ModelParams& params, const ModelGraph& graph);

// Protocol evaluation of a checkpoint over one split of a manifest.
EvalReport evaluate_model(const std::string& checkpoint_path, const DatasetManifest& manifest,
                          const std::string& manifest_path, const std::vector<size_t>& indices,
                          const std::string& cache_dir, int threads,
                          std::vector<std::array<double, 3>>* scatter_out = nullptr);

}  // namespace pcqa

#endif  // PCQA_TRAINER_HPP
