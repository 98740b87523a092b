#ifndef PCQA_TESTS_HELPERS_HPP
#define PCQA_TESTS_HELPERS_HPP

#include <vector>

#include "pcqa/model.hpp"
#include "pcqa/point_cloud.hpp"
#include "pcqa/rng.hpp"

namespace helpers {

inline pcqa::PointCloud random_cloud(size_t n, uint64_t seed, bool with_colors = true,
                                     double extent = 1.0) {
  pcqa::Rng rng(seed);
  pcqa::PointCloud cloud;
  cloud.name = "random-" + std::to_string(seed);
  cloud.positions.reserve(n);
  for (size_t i = 0; i < n; ++i)
    cloud.positions.push_back({rng.next_double() * extent, rng.next_double() * extent,
                               rng.next_double() * extent});
  if (with_colors) {
    cloud.colors.reserve(n);
    for (size_t i = 0; i < n; ++i)
      cloud.colors.push_back({static_cast<uint8_t>(rng.next_below(256)),
                              static_cast<uint8_t>(rng.next_below(256)),
                              static_cast<uint8_t>(rng.next_below(256))});
  }
  return cloud;
}

// points on the unit sphere (uniform via normalized Gaussians)
inline pcqa::PointCloud sphere_cloud(size_t n, uint64_t seed) {
  pcqa::Rng rng(seed);
  pcqa::PointCloud cloud;
  cloud.name = "sphere";
  for (size_t i = 0; i < n; ++i) {
    pcqa::Vec3 v{rng.next_normal(), rng.next_normal(), rng.next_normal()};
    cloud.positions.push_back(v.normalized());
  }
  return cloud;
}

inline pcqa::Tensor2 random_tensor(int rows, int cols, uint64_t seed, double scale = 1.0) {
  pcqa::Rng rng(seed);
  pcqa::Tensor2 t(rows, cols);
  for (double& v : t.data) v = (2.0 * rng.next_double() - 1.0) * scale;
  return t;
}

// synthetic model input: random node features, three symmetric zero-diagonal
// adjacencies, and a connected support mask with self-loops
inline pcqa::ModelGraph random_model_graph(int k, int d, uint64_t seed) {
  pcqa::Rng rng(seed);
  pcqa::ModelGraph graph;
  graph.k = k;
  graph.node_features = random_tensor(k, d, rng.next_u64());
  for (int c = 0; c < 3; ++c) {
    pcqa::Tensor2 adj(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) {
        double w = rng.next_double();
        adj.at(i, j) = w;
        adj.at(j, i) = w;
      }
    graph.adjacency[static_cast<size_t>(c)] = adj;
  }
  graph.mask.assign(static_cast<size_t>(k) * k, 0);
  for (int i = 0; i < k; ++i) {
    graph.mask[static_cast<size_t>(i) * k + i] = 1;
    for (int j = 0; j < k; ++j)
      if (rng.next_double() < 0.6) {
        graph.mask[static_cast<size_t>(i) * k + j] = 1;
        graph.mask[static_cast<size_t>(j) * k + i] = 1;
      }
  }
  return graph;
}

// reduced-width but architecturally complete model, cheap enough for
// exhaustive finite differences
inline pcqa::ModelConfig tiny_model_config() {
  pcqa::ModelConfig config;
  config.input_dim = 8;
  config.gaf.branch_layers = 2;
  config.gaf.heads = 2;
  config.gaf.d_k = 4;
  config.gaf.d_out = 8;
  config.gaf.dropout = 0.2;
  config.gat.hidden = 8;
  config.gat.heads = {3, 2, 2};
  config.gat.feat_dropout = 0.3;
  config.gat.attn_dropout = 0.3;
  return config;
}

}  // namespace helpers

#endif  // PCQA_TESTS_HELPERS_HPP
