#include "pcqa/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

namespace pcqa {

namespace {

double coord(const Vec3& p, int axis) { return axis == 0 ? p.x : axis == 1 ? p.y : p.z; }

}  // namespace

void KdTree3::build(const std::vector<Vec3>& points) {
  points_ = points;
  index_.resize(points_.size());
  std::iota(index_.begin(), index_.end(), size_t{0});
  nodes_.clear();
  nodes_.reserve(points_.empty() ? 1 : 2 * points_.size() / kLeafSize + 8);
  root_ = points_.empty() ? -1 : build_node(0, points_.size());
}

int KdTree3::build_node(size_t begin, size_t end) {
  int id = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }

  Vec3 lo = points_[index_[begin]];
  Vec3 hi = lo;
  for (size_t i = begin; i < end; ++i) {
    const Vec3& p = points_[index_[i]];
    lo.x = std::min(lo.x, p.x); hi.x = std::max(hi.x, p.x);
    lo.y = std::min(lo.y, p.y); hi.y = std::max(hi.y, p.y);
    lo.z = std::min(lo.z, p.z); hi.z = std::max(hi.z, p.z);
  }
  Vec3 extent = hi - lo;
  int axis = 0;
  if (extent.y > extent.x) axis = 1;
  if (coord(extent, 2) > coord(extent, axis)) axis = 2;

  size_t mid = begin + (end - begin) / 2;
  std::nth_element(index_.begin() + begin, index_.begin() + mid, index_.begin() + end,
                   [&](size_t a, size_t b) {
                     double ca = coord(points_[a], axis), cb = coord(points_[b], axis);
                     return ca < cb || (ca == cb && a < b);
                   });

  nodes_[id].axis = axis;
  nodes_[id].split = coord(points_[index_[mid]], axis);
  int left = build_node(begin, mid);
  int right = build_node(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<size_t> KdTree3::radius_indices(const Vec3& query, double radius) const {
  std::vector<size_t> out;
  if (root_ < 0) return out;
  double r2 = radius * radius;

  std::vector<std::pair<int, double>> stack;  // node id, distance to split plane
  stack.emplace_back(root_, 0.0);
  while (!stack.empty()) {
    auto [id, plane_dist] = stack.back();
    stack.pop_back();
    if (plane_dist > radius) continue;
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (size_t i = node.begin; i < node.end; ++i) {
        size_t pi = index_[i];
        if (squared_distance(points_[pi], query) <= r2) out.push_back(pi);
      }
      continue;
    }
    double d = coord(query, node.axis) - node.split;
    int near = d < 0.0 ? node.left : node.right;
    int far = d < 0.0 ? node.right : node.left;
    stack.emplace_back(far, std::abs(d));
    stack.emplace_back(near, 0.0);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<size_t> KdTree3::nearest(const Vec3& query, size_t k) const {
  std::vector<size_t> out;
  if (root_ < 0 || k == 0) return out;
  k = std::min(k, points_.size());

  // max-heap of (distance^2, index); top is the current worst of the best k
  using Entry = std::pair<double, size_t>;
  std::priority_queue<Entry> best;

  std::vector<std::pair<int, double>> stack;
  stack.emplace_back(root_, 0.0);
  while (!stack.empty()) {
    auto [id, plane_dist] = stack.back();
    stack.pop_back();
    if (best.size() == k && plane_dist * plane_dist > best.top().first) continue;
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (size_t i = node.begin; i < node.end; ++i) {
        size_t pi = index_[i];
        double d2 = squared_distance(points_[pi], query);
        Entry e{d2, pi};
        if (best.size() < k) {
          best.push(e);
        } else if (e < best.top()) {
          best.pop();
          best.push(e);
        }
      }
      continue;
    }
    double d = coord(query, node.axis) - node.split;
    int near = d < 0.0 ? node.left : node.right;
    int far = d < 0.0 ? node.right : node.left;
    stack.emplace_back(far, std::abs(d));
    stack.emplace_back(near, 0.0);
  }

  out.resize(best.size());
  for (size_t i = out.size(); i-- > 0;) {
    out[i] = best.top().second;
    best.pop();
  }
  return out;
}

}  // namespace pcqa
