#ifndef PCQA_PCW_GRAPH_HPP
#define PCQA_PCW_GRAPH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "pcqa/features.hpp"
#include "pcqa/kmeans.hpp"
#include "pcqa/point_cloud.hpp"

namespace pcqa {

// Column layout of cluster feature rows: 5 perceptual channels then 3 spatial.
inline constexpr int kChannelL = 0;
inline constexpr int kChannelA = 1;
inline constexpr int kChannelB = 2;
inline constexpr int kChannelCurvature = 3;
inline constexpr int kChannelSaliency = 4;
inline constexpr int kSpatialX = 5;
inline constexpr int kSpatialY = 6;
inline constexpr int kSpatialZ = 7;
inline constexpr size_t kNodeFeatureDim = 8;

struct GraphConfig {
  int k = 32;
  int max_iter = 100;
  uint64_t cluster_seed = 12345;
  // k-means runs on normalized perceptual features plus 0.5-weighted
  // normalized coordinates; features_only drops the spatial block.
  bool cluster_features_only = false;
  double spatial_weight = 0.5;
  // Cluster-graph neighborhood radius as a fraction of the bbox diagonal.
  double cluster_radius_frac = 0.35;
  // similarity_only drops the distance factor from edge weights (ablation).
  bool similarity_only = false;
};

struct PcwGraph {
  int k = 0;
  FeatureMatrix node_features;            // k x 8, normalized units
  std::vector<double> adjacency_color;    // X^1, k*k row-major
  std::vector<double> adjacency_curvature;  // X^2
  std::vector<double> adjacency_saliency;   // X^3
  double cluster_radius = 0.0;  // model units
  double alpha = 0.0;           // = 0.15 * cluster_radius
  bool disconnected_warning = false;

  const std::vector<double>& adjacency(int channel) const {
    return channel == 0 ? adjacency_color : channel == 1 ? adjacency_curvature
                                                         : adjacency_saliency;
  }
};

// Mean feature vector of each cluster's members (rows follow cluster ids).
FeatureMatrix cluster_centroids(const FeatureMatrix& features, const ClusterSet& clusters);

// exp(-distance / (2 alpha^2)). The distance enters unsquared.
double rbf_similarity(double distance, double alpha);

// W_ij = Sim(d_c, alpha) * d_c for node pairs whose spatial centroid distance
// is within cluster_radius, 0 otherwise; zero diagonal. d_c is the Euclidean
// distance restricted to channel_slice columns; the radius test uses
// spatial_slice columns, which must be in the same units as cluster_radius.
std::vector<double> build_channel_adjacency(const FeatureMatrix& centroids,
                                            const std::vector<int>& channel_slice,
                                            const std::vector<int>& spatial_slice,
                                            double cluster_radius, double alpha,
                                            bool similarity_only = false);

// Full construction: k-means over the configured clustering space, centroid
// features, then the three per-channel adjacencies (color / curvature /
// saliency) sharing one spatial radius mask.
PcwGraph build_pcw_graph(const PointCloud& cloud, const FeatureSet& features,
                         const GraphConfig& config, int threads = 1,
                         ClusterSet* clusters_out = nullptr);

// Node mask used by the regressor: union of the three adjacency supports plus
// self-loops.
std::vector<uint8_t> graph_support_mask(const PcwGraph& graph);

// Fixture dump: JSON header {k, cluster_radius, alpha} plus one dense CSV per
// channel adjacency.
std::string graph_header_json(const PcwGraph& graph);
std::string adjacency_csv(const std::vector<double>& adjacency, int k);

// Binary round trip used by the on-disk graph cache.
std::string serialize_graph(const PcwGraph& graph);
PcwGraph deserialize_graph(const std::string& bytes);

}  // namespace pcqa

#endif  // PCQA_PCW_GRAPH_HPP
