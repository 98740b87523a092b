#include "pcqa/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pcqa/error.hpp"
#include "pcqa/rng.hpp"

namespace pcqa {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& value) {
  char* end = nullptr;
  double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size())
    throw Error(ErrorCode::ConfigError, "key '" + key + "': not a number: '" + value + "'");
  return v;
}

int64_t parse_int(const std::string& key, const std::string& value) {
  char* end = nullptr;
  long long v = std::strtoll(value.c_str(), &end, 10);
  if (value.empty() || end != value.c_str() + value.size())
    throw Error(ErrorCode::ConfigError, "key '" + key + "': not an integer: '" + value + "'");
  return v;
}

std::string parse_string(const std::string& key, const std::string& value) {
  if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
    return value.substr(1, value.size() - 2);
  throw Error(ErrorCode::ConfigError, "key '" + key + "': expected a quoted string");
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw Error(ErrorCode::ConfigError, "key '" + key + "': expected true or false");
}

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void apply_key(PipelineConfig& c, const std::string& section, const std::string& key,
               const std::string& value) {
  const std::string full = section + "." + key;
  if (section == "feature") {
    if (key == "neighbor_radius_frac") c.feature.neighbor_radius_frac = parse_real(full, value);
    else if (key == "sigma1") c.feature.sigma1 = parse_real(full, value);
    else if (key == "sigma2") c.feature.sigma2 = parse_real(full, value);
    else if (key == "knn_fallback") c.feature.knn_fallback = static_cast<int>(parse_int(full, value));
    else throw Error(ErrorCode::ConfigError, "unknown key '" + full + "'");
  } else if (section == "clustering") {
    if (key == "k") c.graph.k = static_cast<int>(parse_int(full, value));
    else if (key == "max_iter") c.graph.max_iter = static_cast<int>(parse_int(full, value));
    else if (key == "seed") c.graph.cluster_seed = static_cast<uint64_t>(parse_int(full, value));
    else if (key == "cluster_space") {
      std::string mode = parse_string(full, value);
      if (mode == "features-spatial") c.graph.cluster_features_only = false;
      else if (mode == "features-only") c.graph.cluster_features_only = true;
      else throw Error(ErrorCode::ConfigError, "cluster_space must be features-spatial or features-only");
    } else throw Error(ErrorCode::ConfigError, "unknown key '" + full + "'");
  } else if (section == "graph") {
    if (key == "cluster_radius_frac") c.graph.cluster_radius_frac = parse_real(full, value);
    else if (key == "weight_mode") {
      std::string mode = parse_string(full, value);
      if (mode == "similarity-distance") c.graph.similarity_only = false;
      else if (mode == "similarity-only") c.graph.similarity_only = true;
      else throw Error(ErrorCode::ConfigError, "weight_mode must be similarity-distance or similarity-only");
    } else throw Error(ErrorCode::ConfigError, "unknown key '" + full + "'");
  } else if (section == "model") {
    if (key == "branch_layers") c.gaf.branch_layers = static_cast<int>(parse_int(full, value));
    else if (key == "heads") c.gaf.heads = static_cast<int>(parse_int(full, value));
    else if (key == "d_k") c.gaf.d_k = static_cast<int>(parse_int(full, value));
    else if (key == "d_out") c.gaf.d_out = static_cast<int>(parse_int(full, value));
    else if (key == "gaf_dropout") c.gaf.dropout = parse_real(full, value);
    else if (key == "feat_dropout") c.gat_feat_dropout = parse_real(full, value);
    else if (key == "attn_dropout") c.gat_attn_dropout = parse_real(full, value);
    else throw Error(ErrorCode::ConfigError, "unknown key '" + full + "'");
  } else if (section == "training") {
    if (key == "lr") c.training.lr = parse_real(full, value);
    else if (key == "batch_size") c.training.batch_size = static_cast<int>(parse_int(full, value));
    else if (key == "epochs") c.training.epochs = static_cast<int>(parse_int(full, value));
    else if (key == "patience") c.training.patience = static_cast<int>(parse_int(full, value));
    else if (key == "seed") c.training.seed = static_cast<uint64_t>(parse_int(full, value));
    else if (key == "dropout") c.training.dropout_enabled = parse_bool(full, value);
    else throw Error(ErrorCode::ConfigError, "unknown key '" + full + "'");
  } else {
    throw Error(ErrorCode::ConfigError, "unknown section '[" + section + "]'");
  }
}

}  // namespace

void PipelineConfig::validate() const {
  feature.validate();
  if (graph.k < 2) throw Error(ErrorCode::ConfigError, "clustering.k must be >= 2");
  if (graph.max_iter < 1) throw Error(ErrorCode::ConfigError, "clustering.max_iter must be >= 1");
  if (!(graph.cluster_radius_frac > 0.0))
    throw Error(ErrorCode::ConfigError, "graph.cluster_radius_frac must be > 0");
  if (gaf.branch_layers < 1 || gaf.heads < 1 || gaf.d_k < 1 || gaf.d_out < 1)
    throw Error(ErrorCode::ConfigError, "model section values must be positive");
  if (gaf.dropout < 0.0 || gaf.dropout >= 1.0 || gat_feat_dropout < 0.0 ||
      gat_feat_dropout >= 1.0 || gat_attn_dropout < 0.0 || gat_attn_dropout >= 1.0)
    throw Error(ErrorCode::ConfigError, "dropout rates must lie in [0, 1)");
  if (training.lr <= 0.0) throw Error(ErrorCode::ConfigError, "training.lr must be > 0");
  if (training.batch_size < 1) throw Error(ErrorCode::ConfigError, "training.batch_size must be >= 1");
  if (training.epochs < 1) throw Error(ErrorCode::ConfigError, "training.epochs must be >= 1");
  if (training.patience < 0) throw Error(ErrorCode::ConfigError, "training.patience must be >= 0");
}

std::string PipelineConfig::to_toml() const {
  std::ostringstream out;
  out << "[feature]\n";
  out << "neighbor_radius_frac = " << fmt_real(feature.neighbor_radius_frac) << "\n";
  out << "sigma1 = " << fmt_real(feature.sigma1) << "\n";
  out << "sigma2 = " << fmt_real(feature.sigma2) << "\n";
  out << "knn_fallback = " << feature.knn_fallback << "\n";
  out << "\n[clustering]\n";
  out << "k = " << graph.k << "\n";
  out << "max_iter = " << graph.max_iter << "\n";
  out << "seed = " << graph.cluster_seed << "\n";
  out << "cluster_space = \"" << (graph.cluster_features_only ? "features-only" : "features-spatial")
      << "\"\n";
  out << "\n[graph]\n";
  out << "cluster_radius_frac = " << fmt_real(graph.cluster_radius_frac) << "\n";
  out << "weight_mode = \"" << (graph.similarity_only ? "similarity-only" : "similarity-distance")
      << "\"\n";
  out << "\n[model]\n";
  out << "branch_layers = " << gaf.branch_layers << "\n";
  out << "heads = " << gaf.heads << "\n";
  out << "d_k = " << gaf.d_k << "\n";
  out << "d_out = " << gaf.d_out << "\n";
  out << "gaf_dropout = " << fmt_real(gaf.dropout) << "\n";
  out << "feat_dropout = " << fmt_real(gat_feat_dropout) << "\n";
  out << "attn_dropout = " << fmt_real(gat_attn_dropout) << "\n";
  out << "\n[training]\n";
  out << "lr = " << fmt_real(training.lr) << "\n";
  out << "batch_size = " << training.batch_size << "\n";
  out << "epochs = " << training.epochs << "\n";
  out << "patience = " << training.patience << "\n";
  out << "seed = " << training.seed << "\n";
  out << "dropout = " << (training.dropout_enabled ? "true" : "false") << "\n";
  return out.str();
}

uint64_t PipelineConfig::pipeline_fingerprint() const {
  std::ostringstream key;
  key << fmt_real(feature.neighbor_radius_frac) << '|' << fmt_real(feature.sigma1) << '|'
      << fmt_real(feature.sigma2) << '|' << feature.knn_fallback << '|' << graph.k << '|'
      << graph.max_iter << '|' << graph.cluster_seed << '|' << graph.cluster_features_only << '|'
      << fmt_real(graph.spatial_weight) << '|' << fmt_real(graph.cluster_radius_frac) << '|'
      << graph.similarity_only;
  return fnv1a64(key.str());
}

uint64_t PipelineConfig::model_fingerprint() const {
  std::ostringstream key;
  key << pipeline_fingerprint() << '|' << gaf.branch_layers << '|' << gaf.heads << '|' << gaf.d_k
      << '|' << gaf.d_out << '|' << fmt_real(gaf.dropout) << '|' << fmt_real(gat_feat_dropout)
      << '|' << fmt_real(gat_attn_dropout);
  return fnv1a64(key.str());
}

void apply_config_lines(PipelineConfig& config, const std::string& toml_text) {
  std::istringstream in(toml_text);
  std::string line;
  std::string section;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw Error(ErrorCode::ConfigError,
                    "line " + std::to_string(line_no) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ConfigError,
                  "line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw Error(ErrorCode::ConfigError,
                  "line " + std::to_string(line_no) + ": key outside any [section]");
    apply_key(config, section, key, value);
  }
}

PipelineConfig parse_pipeline_config(const std::string& toml_text) {
  PipelineConfig config;
  apply_config_lines(config, toml_text);
  config.validate();
  return config;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_pipeline_config(ss.str());
}

}  // namespace pcqa
