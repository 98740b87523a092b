// pcqa: no-reference point cloud quality assessment.
//
// Subcommands mirror the pipeline stages (extract, graph, train, predict,
// evaluate, model-info) and share one config file. Machine-readable output
// goes to stdout, diagnostics to stderr. Exit codes: 0 success, 1 usage
// error, 2 data or pipeline error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "pcqa/config.hpp"
#include "pcqa/ply.hpp"
#include "pcqa/trainer.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string cache_dir;
  int threads = 1;
  bool no_cache = false;

  // flag overrides, applied on top of the config file
  double lr = -1.0;
  int k = -1;
  int epochs = -1;
  int batch_size = -1;
  int patience = -1;
  long long seed = -1;
  std::string dropout;  // "", "true", "false"
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_training_flags) {
  cmd->add_option("--config", opts.config_path, "pipeline config file (TOML)");
  cmd->add_option("--cache-dir", opts.cache_dir,
                  "graph cache directory (default: $PCQA_CACHE_DIR or .pcqa-cache)");
  cmd->add_flag("--no-cache", opts.no_cache, "disable the graph cache");
  cmd->add_option("--threads", opts.threads, "worker threads (1 = fully serial)");
  cmd->add_option("--k", opts.k, "number of clusters");
  if (with_training_flags) {
    cmd->add_option("--seed", opts.seed, "training seed");
    cmd->add_option("--lr", opts.lr, "learning rate");
    cmd->add_option("--epochs", opts.epochs, "max training epochs");
    cmd->add_option("--batch-size", opts.batch_size, "batch size");
    cmd->add_option("--patience", opts.patience, "early-stop patience (0 disables)");
    cmd->add_option("--dropout", opts.dropout, "enable dropout: true|false");
  }
}

pcqa::PipelineConfig effective_config(const CommonOpts& opts) {
  pcqa::PipelineConfig config;
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path, std::ios::binary);
    if (!in) throw pcqa::Error(pcqa::ErrorCode::IoError, "cannot open config " + opts.config_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    pcqa::apply_config_lines(config, ss.str());
  }
  // flags win over the file
  std::ostringstream overlay;
  if (opts.k > 0) overlay << "[clustering]\nk = " << opts.k << "\n";
  overlay << "[training]\n";
  if (opts.seed >= 0) overlay << "seed = " << opts.seed << "\n";
  if (opts.lr > 0) overlay << "lr = " << opts.lr << "\n";
  if (opts.epochs > 0) overlay << "epochs = " << opts.epochs << "\n";
  if (opts.batch_size > 0) overlay << "batch_size = " << opts.batch_size << "\n";
  if (opts.patience >= 0) overlay << "patience = " << opts.patience << "\n";
  if (!opts.dropout.empty()) overlay << "dropout = " << opts.dropout << "\n";
  pcqa::apply_config_lines(config, overlay.str());
  config.validate();
  return config;
}

std::string cache_dir_of(const CommonOpts& opts) {
  if (opts.no_cache) return "";
  return opts.cache_dir.empty() ? pcqa::default_cache_dir() : opts.cache_dir;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw pcqa::Error(pcqa::ErrorCode::IoError, "cannot write " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

int run_extract(const CommonOpts& opts, const std::string& cloud_path, const std::string& out_path) {
  pcqa::PipelineConfig config = effective_config(opts);
  pcqa::PointCloud cloud = pcqa::read_ply_file(cloud_path);
  cloud.validate();
  pcqa::FeatureSet features = pcqa::extract_features(cloud, config.feature, opts.threads);
  if (features.warnings.missing_color)
    std::cerr << "warning: cloud has no colors, LAB fixed at (50,0,0)\n";
  if (features.warnings.degenerate_neighborhoods > 0)
    std::cerr << "warning: " << features.warnings.degenerate_neighborhoods
              << " degenerate neighborhoods\n";
  std::string csv = pcqa::feature_csv(features);
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    write_text(out_path, csv);
    write_text(out_path + ".config.toml", config.to_toml());
    std::cerr << "wrote " << out_path << " (" << features.size() << " points)\n";
  }
  return 0;
}

int run_graph(const CommonOpts& opts, const std::string& cloud_path, const std::string& prefix) {
  pcqa::PipelineConfig config = effective_config(opts);
  pcqa::PcwGraph graph =
      pcqa::load_or_build_graph(cloud_path, config, cache_dir_of(opts), opts.threads);
  if (graph.disconnected_warning)
    std::cerr << "warning: graph has isolated nodes at radius "
              << graph.cluster_radius << "\n";
  if (prefix.empty()) {
    std::cout << pcqa::graph_header_json(graph);
  } else {
    write_text(prefix + ".header.json", pcqa::graph_header_json(graph));
    write_text(prefix + ".color.csv", pcqa::adjacency_csv(graph.adjacency_color, graph.k));
    write_text(prefix + ".curvature.csv", pcqa::adjacency_csv(graph.adjacency_curvature, graph.k));
    write_text(prefix + ".saliency.csv", pcqa::adjacency_csv(graph.adjacency_saliency, graph.k));
    write_text(prefix + ".config.toml", config.to_toml());
    std::cerr << "wrote " << prefix << ".{header.json,color.csv,curvature.csv,saliency.csv}\n";
  }
  return 0;
}

int run_train(const CommonOpts& opts, const std::string& manifest_path, const std::string& out_path,
              std::string report_path) {
  pcqa::PipelineConfig config = effective_config(opts);
  pcqa::DatasetManifest manifest = pcqa::load_manifest(manifest_path);

  pcqa::SplitPlan plan;
  pcqa::TrainResult result =
      pcqa::train(manifest, manifest_path, config, cache_dir_of(opts), opts.threads, &plan);
  result.report.checkpoint_path = out_path;

  pcqa::save_checkpoint(out_path, result.params, &result.optimizer);
  pcqa::CheckpointSidecar sidecar;
  sidecar.config_toml = config.to_toml();
  sidecar.mos_min = manifest.mos_min;
  sidecar.mos_max = manifest.mos_max;
  sidecar.pipeline_fingerprint = config.pipeline_fingerprint();
  sidecar.seed = config.training.seed;
  sidecar.best_epoch = result.report.best_epoch;
  pcqa::write_sidecar(out_path, sidecar);
  write_text(out_path + ".config.toml", config.to_toml());

  if (report_path.empty()) report_path = out_path + ".report.json";
  write_text(report_path, result.report.to_json(config.to_toml()));

  std::cerr << "trained " << result.report.epochs.size() << " epochs in "
            << result.report.wall_clock_seconds << "s, best epoch "
            << result.report.best_epoch << " (val PLCC " << result.report.best_val_plcc << ")\n";
  std::cout << "checkpoint=" << out_path << "\n";
  std::cout << "report=" << report_path << "\n";
  return 0;
}

int run_predict(const CommonOpts& opts, const std::string& checkpoint, const std::string& cloud) {
  const pcqa::PipelineConfig* override_config = nullptr;
  pcqa::PipelineConfig config;
  if (!opts.config_path.empty()) {
    config = effective_config(opts);
    override_config = &config;
  }
  double score =
      pcqa::predict_cloud(checkpoint, cloud, override_config, cache_dir_of(opts), opts.threads);
  std::printf("score=%.17g\n", score);
  return 0;
}

int run_evaluate(const CommonOpts& opts, const std::string& checkpoint,
                 const std::string& manifest_path, const std::string& split,
                 const std::string& out_path, const std::string& scatter_path) {
  pcqa::DatasetManifest manifest = pcqa::load_manifest(manifest_path, true);
  pcqa::CheckpointSidecar sidecar = pcqa::read_sidecar(checkpoint);
  uint64_t seed = opts.seed >= 0 ? static_cast<uint64_t>(opts.seed) : sidecar.seed;
  pcqa::SplitPlan plan = pcqa::split_dataset(manifest, seed);

  const std::vector<size_t>* indices = nullptr;
  if (split == "val") indices = &plan.val;
  else if (split == "test") indices = &plan.test;
  else if (split == "all") indices = nullptr;
  else throw CLI::ValidationError("--split must be val, test, or all");

  std::vector<size_t> all;
  if (!indices) {
    all.resize(manifest.entries.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = i;
    indices = &all;
  }

  std::vector<std::array<double, 3>> scatter;
  pcqa::EvalReport report =
      pcqa::evaluate_model(checkpoint, manifest, manifest_path, *indices, cache_dir_of(opts),
                           opts.threads, scatter_path.empty() ? nullptr : &scatter);
  if (!out_path.empty()) write_text(out_path, report.to_json() + "\n");
  if (!scatter_path.empty()) {
    std::string csv = "pred,mapped_pred,mos\n";
    char buf[128];
    for (const auto& row : scatter) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", row[0], row[1], row[2]);
      csv += buf;
    }
    write_text(scatter_path, csv);
  }
  std::cout << report.to_table();
  return 0;
}

int run_model_info(const CommonOpts& opts) {
  pcqa::PipelineConfig config = effective_config(opts);
  pcqa::ModelConfig mc = config.model();
  pcqa::ModelParams params = pcqa::ModelParams::init(mc, 0);

  std::printf("GAT regressor\n");
  std::printf("  num_layers      3\n");
  std::printf("  num_hidden      %d\n", mc.gat.hidden);
  std::printf("  heads           [%d,%d,%d]\n", mc.gat.heads[0], mc.gat.heads[1], mc.gat.heads[2]);
  std::printf("  activation      tanh\n");
  std::printf("  feat_dropout    %g\n", mc.gat.feat_dropout);
  std::printf("  attn_dropout    %g\n", mc.gat.attn_dropout);
  std::printf("  negative_slope  %g\n", mc.gat.leaky_slope);
  std::printf("  residual        false\n");
  std::printf("GAF fusion\n");
  std::printf("  branches        3 (color, curvature, saliency)\n");
  std::printf("  layers/branch   %d\n", mc.gaf.branch_layers);
  std::printf("  heads           %d\n", mc.gaf.heads);
  std::printf("  d_k             %d\n", mc.gaf.d_k);
  std::printf("  d_out           %d\n", mc.gaf.d_out);
  std::printf("  dropout         %g\n", mc.gaf.dropout);
  std::printf("training defaults\n");
  std::printf("  lr              %g\n", config.training.lr);
  std::printf("  batch_size      %d\n", config.training.batch_size);
  std::printf("  epochs          %d\n", config.training.epochs);
  std::printf("  patience        %d\n", config.training.patience);
  std::printf("pipeline defaults\n");
  std::printf("  clusters (k)    %d\n", config.graph.k);
  std::printf("  radius_frac     %g\n", config.graph.cluster_radius_frac);
  std::printf("  neighbor_frac   %g\n", config.feature.neighbor_radius_frac);
  std::printf("parameters        %zu\n", params.parameter_count());
  std::printf("\neffective config:\n%s", config.to_toml().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"no-reference point cloud quality assessment"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string cloud_path, out_path, manifest_path, checkpoint, split = "test", report_path,
              scatter_path, prefix;

  CLI::App* extract = app.add_subcommand("extract", "per-point perceptual features to CSV");
  add_common(extract, opts, false);
  extract->add_option("--cloud", cloud_path, "input PLY")->required();
  extract->add_option("--out", out_path, "output CSV (default stdout)");

  CLI::App* graph = app.add_subcommand("graph", "cluster graph adjacencies to CSV/JSON");
  add_common(graph, opts, false);
  graph->add_option("--cloud", cloud_path, "input PLY")->required();
  graph->add_option("--out-prefix", prefix, "output file prefix (default: header to stdout)");

  CLI::App* train = app.add_subcommand("train", "train on a manifest");
  add_common(train, opts, true);
  train->add_option("--manifest", manifest_path, "dataset manifest CSV")->required();
  train->add_option("--out", out_path, "checkpoint output path")->required();
  train->add_option("--report", report_path, "training report JSON path");

  CLI::App* predict = app.add_subcommand("predict", "score one cloud");
  add_common(predict, opts, false);
  predict->add_option("--checkpoint", checkpoint, "trained checkpoint")->required();
  predict->add_option("--cloud", cloud_path, "input PLY")->required();

  CLI::App* evaluate = app.add_subcommand("evaluate", "protocol metrics over a split");
  add_common(evaluate, opts, true);
  evaluate->add_option("--checkpoint", checkpoint, "trained checkpoint")->required();
  evaluate->add_option("--manifest", manifest_path, "dataset manifest CSV")->required();
  evaluate->add_option("--split", split, "val | test | all");
  evaluate->add_option("--out", out_path, "report JSON path");
  evaluate->add_option("--scatter", scatter_path, "scatter CSV path (pred,mapped_pred,mos)");

  CLI::App* info = app.add_subcommand("model-info", "print the instantiated architecture");
  add_common(info, opts, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (extract->parsed()) return run_extract(opts, cloud_path, out_path);
    if (graph->parsed()) return run_graph(opts, cloud_path, prefix);
    if (train->parsed()) return run_train(opts, manifest_path, out_path, report_path);
    if (predict->parsed()) return run_predict(opts, checkpoint, cloud_path);
    if (evaluate->parsed())
      return run_evaluate(opts, checkpoint, manifest_path, split, out_path, scatter_path);
    if (info->parsed()) return run_model_info(opts);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
