#ifndef PCQA_PIPELINE_HPP
#define PCQA_PIPELINE_HPP

#include <string>

#include "pcqa/config.hpp"
#include "pcqa/pcw_graph.hpp"

namespace pcqa {

// features -> clusters -> PCW graph for one cloud.
PcwGraph cloud_to_graph(const PointCloud& cloud, const PipelineConfig& config, int threads);

// Disk cache keyed by (cloud bytes hash, pipeline fingerprint). Feature
// extraction dominates the runtime, so training epochs must never repeat it.
// cache_dir empty disables caching.
PcwGraph load_or_build_graph(const std::string& cloud_path, const PipelineConfig& config,
                             const std::string& cache_dir, int threads);

// PCQA_CACHE_DIR when set, otherwise ".pcqa-cache".
std::string default_cache_dir();

// Joins a manifest-relative cloud path against the manifest's directory.
std::string resolve_cloud_path(const std::string& manifest_path, const std::string& cloud_path);

uint64_t file_content_hash(const std::string& path);

}  // namespace pcqa

#endif  // PCQA_PIPELINE_HPP
