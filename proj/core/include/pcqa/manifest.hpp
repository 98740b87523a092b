#ifndef PCQA_MANIFEST_HPP
#define PCQA_MANIFEST_HPP

#include <string>
#include <vector>

namespace pcqa {

struct ManifestEntry {
  std::string cloud_path;
  std::string reference_id;
  double mos = 0.0;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  double mos_min = 0.0;
  double mos_max = 0.0;
};

// Loads a CSV with header `cloud_path,reference_id,mos` (UTF-8, LF or CRLF).
// Paths are stored as written; resolution happens at cloud-load time. A
// manifest whose scores are all equal has no usable MOS range and is refused
// unless allow_degenerate_range is set (predict-only workflows).
DatasetManifest load_manifest(const std::string& path, bool allow_degenerate_range = false);

DatasetManifest parse_manifest(const std::string& csv_text, bool allow_degenerate_range = false);

}  // namespace pcqa

#endif  // PCQA_MANIFEST_HPP
