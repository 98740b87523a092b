#ifndef PCQA_POINT_CLOUD_HPP
#define PCQA_POINT_CLOUD_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pcqa/error.hpp"
#include "pcqa/geometry.hpp"

namespace pcqa {

using Rgb8 = std::array<uint8_t, 3>;

struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Rgb8> colors;    // empty or same length as positions
  std::vector<Vec3> normals;   // empty or same length as positions, unit vectors
  std::string name;

  size_t size() const { return positions.size(); }
  bool has_colors() const { return !colors.empty(); }
  bool has_normals() const { return !normals.empty(); }

  // Enforced at pipeline entry: non-empty, attribute arrays aligned, normals
  // unit length within 1e-6.
  void validate() const {
    if (positions.empty())
      throw Error(ErrorCode::InvalidCloud, "empty point cloud '" + name + "'");
    if (!colors.empty() && colors.size() != positions.size())
      throw Error(ErrorCode::InvalidCloud, "color count does not match vertex count");
    if (!normals.empty() && normals.size() != positions.size())
      throw Error(ErrorCode::InvalidCloud, "normal count does not match vertex count");
    for (const Vec3& n : normals) {
      double len = n.norm();
      if (len < 1.0 - 1e-6 || len > 1.0 + 1e-6)
        throw Error(ErrorCode::InvalidCloud, "normal is not unit length");
    }
  }
};

struct BoundingBox {
  Vec3 min_corner;
  Vec3 max_corner;
  double diagonal = 0.0;
};

inline BoundingBox bounding_box(const PointCloud& cloud) {
  if (cloud.positions.empty())
    throw Error(ErrorCode::InvalidCloud, "bounding_box of empty cloud");
  BoundingBox box;
  box.min_corner = box.max_corner = cloud.positions.front();
  for (const Vec3& p : cloud.positions) {
    box.min_corner.x = std::min(box.min_corner.x, p.x);
    box.min_corner.y = std::min(box.min_corner.y, p.y);
    box.min_corner.z = std::min(box.min_corner.z, p.z);
    box.max_corner.x = std::max(box.max_corner.x, p.x);
    box.max_corner.y = std::max(box.max_corner.y, p.y);
    box.max_corner.z = std::max(box.max_corner.z, p.z);
  }
  box.diagonal = distance(box.min_corner, box.max_corner);
  return box;
}

}  // namespace pcqa

#endif  // PCQA_POINT_CLOUD_HPP
