#include "pcqa/manifest.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pcqa/error.hpp"

namespace pcqa {

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  return fields;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

DatasetManifest parse_manifest(const std::string& csv_text, bool allow_degenerate_range) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyManifest, "manifest has no header");

  auto header = split_csv_row(line);
  for (auto& h : header) h = trim(h);
  auto col_of = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw Error(ErrorCode::MissingColumn, "manifest lacks column '" + name + "'");
    return static_cast<size_t>(it - header.begin());
  };
  size_t path_col = col_of("cloud_path");
  size_t ref_col = col_of("reference_id");
  size_t mos_col = col_of("mos");

  DatasetManifest manifest;
  size_t row_index = 0;
  while (std::getline(in, line)) {
    ++row_index;
    if (trim(line).empty()) continue;
    auto fields = split_csv_row(line);
    if (fields.size() <= std::max({path_col, ref_col, mos_col}))
      throw Error(ErrorCode::MissingColumn,
                  "row " + std::to_string(row_index) + " has too few fields");
    ManifestEntry entry;
    entry.cloud_path = trim(fields[path_col]);
    entry.reference_id = trim(fields[ref_col]);
    std::string mos_text = trim(fields[mos_col]);
    char* end = nullptr;
    entry.mos = std::strtod(mos_text.c_str(), &end);
    if (mos_text.empty() || end != mos_text.c_str() + mos_text.size())
      throw Error(ErrorCode::UnparsableScore, "row " + std::to_string(row_index) +
                                                  ", column 'mos': '" + mos_text + "'");
    if (entry.reference_id.empty())
      throw Error(ErrorCode::MissingColumn,
                  "row " + std::to_string(row_index) + " has empty reference_id");
    manifest.entries.push_back(std::move(entry));
  }

  if (manifest.entries.empty()) throw Error(ErrorCode::EmptyManifest, "manifest has no data rows");

  manifest.mos_min = manifest.entries.front().mos;
  manifest.mos_max = manifest.entries.front().mos;
  for (const auto& e : manifest.entries) {
    manifest.mos_min = std::min(manifest.mos_min, e.mos);
    manifest.mos_max = std::max(manifest.mos_max, e.mos);
  }
  if (manifest.mos_min == manifest.mos_max && !allow_degenerate_range)
    throw Error(ErrorCode::EmptyRange,
                "all MOS values equal " + std::to_string(manifest.mos_min) +
                    "; degenerate manifests are only usable for predict-only runs");
  return manifest;
}

DatasetManifest load_manifest(const std::string& path, bool allow_degenerate_range) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open manifest " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), allow_degenerate_range);
}

}  // namespace pcqa
