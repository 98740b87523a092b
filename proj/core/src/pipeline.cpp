#include "pcqa/pipeline.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pcqa/ply.hpp"

namespace pcqa {

PcwGraph cloud_to_graph(const PointCloud& cloud, const PipelineConfig& config, int threads) {
  cloud.validate();
  FeatureSet features = extract_features(cloud, config.feature, threads);
  return build_pcw_graph(cloud, features, config.graph, threads);
}

std::string default_cache_dir() {
  const char* env = std::getenv("PCQA_CACHE_DIR");
  if (env && *env) return env;
  return ".pcqa-cache";
}

std::string resolve_cloud_path(const std::string& manifest_path, const std::string& cloud_path) {
  std::filesystem::path p(cloud_path);
  if (p.is_absolute()) return cloud_path;
  std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();
  return (base / p).string();
}

uint64_t file_content_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  char buf[65536];
  uint64_t h = 0xcbf29ce484222325ull;
  while (in) {
    in.read(buf, sizeof(buf));
    h = fnv1a64(buf, static_cast<size_t>(in.gcount()), h);
  }
  return h;
}

PcwGraph load_or_build_graph(const std::string& cloud_path, const PipelineConfig& config,
                             const std::string& cache_dir, int threads) {
  std::string cache_file;
  if (!cache_dir.empty()) {
    uint64_t content = file_content_hash(cloud_path);
    uint64_t key = config.pipeline_fingerprint();
    char name[64];
    std::snprintf(name, sizeof(name), "%016llx-%016llx.pcw",
                  static_cast<unsigned long long>(content), static_cast<unsigned long long>(key));
    cache_file = (std::filesystem::path(cache_dir) / name).string();
    std::ifstream in(cache_file, std::ios::binary);
    if (in) {
      std::ostringstream ss;
      ss << in.rdbuf();
      try {
        return deserialize_graph(ss.str());
      } catch (const Error&) {
        // stale or corrupt cache entry: rebuild below
      }
    }
  }

  PointCloud cloud = read_ply_file(cloud_path);
  PcwGraph graph = cloud_to_graph(cloud, config, threads);

  if (!cache_file.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(cache_dir, ec);
    std::ofstream out(cache_file, std::ios::binary | std::ios::trunc);
    if (out) {
      std::string bytes = serialize_graph(graph);
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
  }
  return graph;
}

}  // namespace pcqa
