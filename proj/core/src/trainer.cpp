#include "pcqa/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "pcqa/threading.hpp"

namespace pcqa {

double mse_loss(const std::vector<double>& preds, const std::vector<double>& targets) {
  if (preds.size() != targets.size() || preds.empty())
    throw Error(ErrorCode::LengthMismatch, "mse_loss needs equal non-empty vectors");
  double acc = 0.0;
  for (size_t i = 0; i < preds.size(); ++i) {
    double d = preds[i] - targets[i];
    acc += d * d;
  }
  return acc / static_cast<double>(preds.size());
}

namespace {

// selection metric for "best validation performance": PLCC when defined,
// otherwise strictly below any real PLCC and improving as val MSE drops
double validation_metric(double val_plcc, bool constant, double val_loss) {
  if (!constant) return val_plcc;
  return -2.0 - val_loss;
}

}  // namespace

TrainResult train_on_samples(const std::vector<TrainSample>& train_set,
                             const std::vector<TrainSample>& val_set,
                             const PipelineConfig& config, uint64_t seed, int threads) {
  if (train_set.empty()) throw Error(ErrorCode::TooFewSamples, "empty training set");
  auto t_start = std::chrono::steady_clock::now();

  ModelConfig model_config = config.model();
  ModelParams params = ModelParams::init(model_config, derive_seed(seed, "init"));
  std::vector<Tensor2*> tensors = params.tensor_ptrs();
  OptimizerState optimizer = OptimizerState::create(tensors, config.training.lr);

  TrainResult result;
  result.report.seed = seed;
  result.report.n_train = train_set.size();
  result.report.n_val = val_set.size();

  ModelParams best_params = params;
  OptimizerState best_optimizer = optimizer;
  double best_metric = -1e300;

  RunMode train_mode = config.training.dropout_enabled ? RunMode::Train : RunMode::Infer;
  int batch_size = config.training.batch_size;

  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), size_t{0});

  std::vector<Tensor2> batch_grads;
  batch_grads.reserve(tensors.size());
  for (Tensor2* t : tensors) batch_grads.emplace_back(t->rows, t->cols);

  for (int epoch = 0; epoch < config.training.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(seed, "epoch-shuffle", static_cast<uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double epoch_sse = 0.0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(batch_size)) {
      size_t end = std::min(order.size(), start + static_cast<size_t>(batch_size));
      size_t bn = end - start;

      for (Tensor2& g : batch_grads) std::fill(g.data.begin(), g.data.end(), 0.0);

      // per-sample forward/backward in chunks sized to the thread count;
      // the reduction always walks samples in order, so the result does not
      // depend on the thread count
      size_t chunk = threads > 1 ? static_cast<size_t>(threads) : 1;
      std::vector<std::vector<Tensor2>> sample_grads(chunk);
      std::vector<double> sample_scores(chunk);
      for (size_t cstart = 0; cstart < bn; cstart += chunk) {
        size_t cn = std::min(chunk, bn - cstart);
        parallel_for(cn, threads, [&](size_t s) {
          const TrainSample& sample = train_set[order[start + cstart + s]];
          uint64_t dropout_seed = derive_seed(
              seed, "dropout",
              (static_cast<uint64_t>(epoch) << 32) | static_cast<uint64_t>(start + cstart + s));
          // backward is seeded with 1; d(mse)/d(score) is applied on reduce
          sample_scores[s] = model_score_and_grads(sample.graph, params, train_mode,
                                                   dropout_seed, 1.0, sample_grads[s]);
        });
        for (size_t s = 0; s < cn; ++s) {
          const TrainSample& sample = train_set[order[start + cstart + s]];
          double diff = sample_scores[s] - sample.target;
          double upstream = 2.0 * diff / static_cast<double>(bn);
          epoch_sse += diff * diff;
          for (size_t t = 0; t < batch_grads.size(); ++t) {
            const Tensor2& g = sample_grads[s][t];
            double* dst = batch_grads[t].data.data();
            for (size_t i = 0; i < g.size(); ++i) dst[i] += upstream * g.data[i];
          }
        }
      }
      adam_step(tensors, batch_grads, optimizer);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_sse / static_cast<double>(train_set.size());

    // validation in infer mode
    double metric;
    if (!val_set.empty()) {
      std::vector<double> preds(val_set.size()), targets(val_set.size());
      parallel_for(val_set.size(), threads, [&](size_t i) {
        preds[i] = model_score(val_set[i].graph, params, RunMode::Infer, 0);
      });
      for (size_t i = 0; i < val_set.size(); ++i) targets[i] = val_set[i].target;
      stats.val_loss = mse_loss(preds, targets);
      bool constant = false;
      stats.val_plcc = val_set.size() >= 2 ? pearson(preds, targets, &constant) : 0.0;
      if (val_set.size() < 2) constant = true;
      metric = validation_metric(stats.val_plcc, constant, stats.val_loss);
    } else {
      // no validation split: fall back to training loss
      stats.val_loss = stats.train_loss;
      stats.val_plcc = 0.0;
      metric = -2.0 - stats.train_loss;
    }
    result.report.epochs.push_back(stats);

    if (metric > best_metric) {
      best_metric = metric;
      result.report.best_epoch = epoch;
      result.report.best_val_plcc = stats.val_plcc;
      best_params = params;
      best_optimizer = optimizer;
    }
    if (config.training.stop_at_train_loss > 0.0 &&
        stats.train_loss < config.training.stop_at_train_loss) {
      // capacity checks want the reached-it model, not the best-val snapshot
      best_params = params;
      best_optimizer = optimizer;
      result.report.best_epoch = epoch;
      break;
    }
    if (config.training.patience > 0 &&
        epoch - result.report.best_epoch >= config.training.patience)
      break;
  }

  result.params = std::move(best_params);
  result.optimizer = std::move(best_optimizer);
  result.report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

namespace {

TrainSample make_sample(const ModelGraph& graph, double mos, double mos_min, double mos_max) {
  TrainSample sample;
  sample.graph = graph;
  sample.mos = mos;
  sample.target = mos_max > mos_min ? (mos - mos_min) / (mos_max - mos_min) : 0.0;
  return sample;
}

std::vector<ModelGraph> build_graphs(const DatasetManifest& manifest,
                                     const std::string& manifest_path,
                                     const PipelineConfig& config, const std::string& cache_dir,
                                     int threads) {
  std::vector<ModelGraph> graphs(manifest.entries.size());
  std::vector<std::string> failures(manifest.entries.size());
  parallel_for(manifest.entries.size(), threads, [&](size_t i) {
    const std::string path = resolve_cloud_path(manifest_path, manifest.entries[i].cloud_path);
    try {
      PcwGraph graph = load_or_build_graph(path, config, cache_dir, /*threads=*/1);
      graphs[i] = to_model_graph(graph);
    } catch (const std::exception& e) {
      failures[i] = path + ": " + e.what();
    }
  });
  for (const std::string& f : failures)
    if (!f.empty()) throw Error(ErrorCode::IoError, "pipeline failed for " + f);
  return graphs;
}

}  // namespace

TrainResult train(const DatasetManifest& manifest, const std::string& manifest_path,
                  const PipelineConfig& config, const std::string& cache_dir, int threads,
                  SplitPlan* plan_out) {
  SplitPlan plan = split_dataset(manifest, config.training.seed);
  if (plan_out) *plan_out = plan;

  std::vector<ModelGraph> graphs =
      build_graphs(manifest, manifest_path, config, cache_dir, threads);

  std::vector<TrainSample> train_set, val_set;
  train_set.reserve(plan.train.size());
  val_set.reserve(plan.val.size());
  for (size_t i : plan.train)
    train_set.push_back(make_sample(graphs[i], manifest.entries[i].mos, manifest.mos_min,
                                    manifest.mos_max));
  for (size_t i : plan.val)
    val_set.push_back(make_sample(graphs[i], manifest.entries[i].mos, manifest.mos_min,
                                  manifest.mos_max));

  TrainResult result = train_on_samples(train_set, val_set, config, config.training.seed, threads);
  result.report.n_test = plan.test.size();
  return result;
}

std::string TrainReport::to_json(const std::string& config_toml) const {
  nlohmann::json j;
  j["seed"] = seed;
  j["best_epoch"] = best_epoch;
  j["best_val_plcc"] = best_val_plcc;
  j["n_train"] = n_train;
  j["n_val"] = n_val;
  j["n_test"] = n_test;
  j["checkpoint"] = checkpoint_path;
  j["config"] = config_toml;
  nlohmann::json epochs_json = nlohmann::json::array();
  for (const EpochStats& e : epochs) {
    epochs_json.push_back({{"epoch", e.epoch},
                           {"train_loss", e.train_loss},
                           {"val_loss", e.val_loss},
                           {"val_plcc", e.val_plcc}});
  }
  j["epochs"] = epochs_json;
  return j.dump(2) + "\n";
}

std::string CheckpointSidecar::to_json() const {
  nlohmann::json j;
  j["config"] = config_toml;
  j["mos_min"] = mos_min;
  j["mos_max"] = mos_max;
  j["pipeline_fingerprint"] = pipeline_fingerprint;
  j["seed"] = seed;
  j["best_epoch"] = best_epoch;
  return j.dump(2) + "\n";
}

CheckpointSidecar CheckpointSidecar::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  CheckpointSidecar s;
  s.config_toml = j.at("config").get<std::string>();
  s.mos_min = j.at("mos_min").get<double>();
  s.mos_max = j.at("mos_max").get<double>();
  s.pipeline_fingerprint = j.at("pipeline_fingerprint").get<uint64_t>();
  s.seed = j.at("seed").get<uint64_t>();
  s.best_epoch = j.at("best_epoch").get<int>();
  return s;
}

void write_sidecar(const std::string& checkpoint_path, const CheckpointSidecar& sidecar) {
  std::string path = checkpoint_path + ".json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write sidecar " + path);
  std::string text = sidecar.to_json();
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

CheckpointSidecar read_sidecar(const std::string& checkpoint_path) {
  std::string path = checkpoint_path + ".json";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open sidecar " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return CheckpointSidecar::from_json(ss.str());
}

double predict_graph(ModelParams& params, const ModelGraph& graph) {
  return model_score(graph, params, RunMode::Infer, 0);
}

double predict_cloud(const std::string& checkpoint_path, const std::string& cloud_path,
                     const PipelineConfig* override_config, const std::string& cache_dir,
                     int threads) {
  CheckpointSidecar sidecar = read_sidecar(checkpoint_path);
  PipelineConfig config = parse_pipeline_config(sidecar.config_toml);
  if (override_config &&
      override_config->pipeline_fingerprint() != config.pipeline_fingerprint())
    throw Error(ErrorCode::ConfigMismatch,
                "supplied config does not match the checkpoint's pipeline settings "
                "(k, radii, sigma must be identical)");

  ModelParams params = load_checkpoint(checkpoint_path, config.model());
  PcwGraph graph = load_or_build_graph(cloud_path, config, cache_dir, threads);
  ModelGraph mg = to_model_graph(graph);
  double normalized = predict_graph(params, mg);
  return sidecar.mos_min + normalized * (sidecar.mos_max - sidecar.mos_min);
}

EvalReport evaluate_model(const std::string& checkpoint_path, const DatasetManifest& manifest,
                          const std::string& manifest_path, const std::vector<size_t>& indices,
                          const std::string& cache_dir, int threads,
                          std::vector<std::array<double, 3>>* scatter_out) {
  if (indices.empty()) throw Error(ErrorCode::TooFewSamples, "empty evaluation split");
  CheckpointSidecar sidecar = read_sidecar(checkpoint_path);
  PipelineConfig config = parse_pipeline_config(sidecar.config_toml);
  ModelParams params = load_checkpoint(checkpoint_path, config.model());

  std::vector<double> preds(indices.size()), mos(indices.size());
  std::vector<std::string> failures(indices.size());
  parallel_for(indices.size(), threads, [&](size_t i) {
    const ManifestEntry& entry = manifest.entries[indices[i]];
    const std::string path = resolve_cloud_path(manifest_path, entry.cloud_path);
    try {
      PcwGraph graph = load_or_build_graph(path, config, cache_dir, /*threads=*/1);
      ModelGraph mg = to_model_graph(graph);
      double normalized = predict_graph(params, mg);
      preds[i] = sidecar.mos_min + normalized * (sidecar.mos_max - sidecar.mos_min);
      mos[i] = entry.mos;
    } catch (const std::exception& e) {
      failures[i] = path + ": " + e.what();
    }
  });
  for (const std::string& f : failures)
    if (!f.empty()) throw Error(ErrorCode::IoError, "pipeline failed for " + f);

  EvalReport report = evaluate_scores(preds, mos);
  if (scatter_out) {
    scatter_out->clear();
    for (size_t i = 0; i < preds.size(); ++i)
      scatter_out->push_back({preds[i], logistic5(report.logistic, preds[i]), mos[i]});
  }
  return report;
}

}  // namespace pcqa
