#ifndef PCQA_KDTREE_HPP
#define PCQA_KDTREE_HPP

#include <cstddef>
#include <vector>

#include "pcqa/geometry.hpp"

namespace pcqa {

// Static k-d tree over 3D points. Built once, read-only afterwards; concurrent
// queries are safe.
class KdTree3 {
 public:
  KdTree3() = default;
  explicit KdTree3(const std::vector<Vec3>& points) { build(points); }

  void build(const std::vector<Vec3>& points);

  // All indices i with ||points[i] - query|| <= radius (the query point's own
  // index is included when the query is a cloud point). Ascending order.
  std::vector<size_t> radius_indices(const Vec3& query, double radius) const;

  // Indices of the k nearest points to query, nearest first. Ties broken by
  // index so the result is deterministic.
  std::vector<size_t> nearest(const Vec3& query, size_t k) const;

  size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

 private:
  struct Node {
    int axis = -1;          // -1 marks a leaf
    double split = 0.0;
    size_t begin = 0, end = 0;  // index range for leaves
    int left = -1, right = -1;
  };

  int build_node(size_t begin, size_t end);

  std::vector<Vec3> points_;
  std::vector<size_t> index_;  // permutation of point ids, partitioned by the tree
  std::vector<Node> nodes_;
  int root_ = -1;

  static constexpr size_t kLeafSize = 16;
};

}  // namespace pcqa

#endif  // PCQA_KDTREE_HPP
