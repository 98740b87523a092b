#include "pcqa/pcw_graph.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

#include "pcqa/error.hpp"

namespace pcqa {

FeatureMatrix cluster_centroids(const FeatureMatrix& features, const ClusterSet& clusters) {
  if (clusters.assignments.size() != features.n)
    throw Error(ErrorCode::ShapeMismatch, "assignments do not cover the feature rows");
  FeatureMatrix centroids;
  centroids.n = static_cast<size_t>(clusters.k);
  centroids.dim = features.dim;
  centroids.values.assign(centroids.n * centroids.dim, 0.0);
  std::vector<size_t> counts(centroids.n, 0);

  for (size_t i = 0; i < features.n; ++i) {
    int c = clusters.assignments[i];
    double* dst = centroids.row(static_cast<size_t>(c));
    const double* src = features.row(i);
    for (size_t d = 0; d < features.dim; ++d) dst[d] += src[d];
    ++counts[static_cast<size_t>(c)];
  }
  for (size_t c = 0; c < centroids.n; ++c) {
    if (counts[c] == 0)
      throw Error(ErrorCode::EmptyCluster, "cluster " + std::to_string(c) + " has no members");
    double inv = 1.0 / static_cast<double>(counts[c]);
    double* row = centroids.row(c);
    for (size_t d = 0; d < centroids.dim; ++d) row[d] *= inv;
  }
  return centroids;
}

double rbf_similarity(double distance, double alpha) {
  return std::exp(-distance / (2.0 * alpha * alpha));
}

std::vector<double> build_channel_adjacency(const FeatureMatrix& centroids,
                                            const std::vector<int>& channel_slice,
                                            const std::vector<int>& spatial_slice,
                                            double cluster_radius, double alpha,
                                            bool similarity_only) {
  size_t k = centroids.n;
  std::vector<double> adjacency(k * k, 0.0);
  double radius2 = cluster_radius * cluster_radius;

  for (size_t i = 0; i < k; ++i) {
    const double* ci = centroids.row(i);
    for (size_t j = i + 1; j < k; ++j) {
      const double* cj = centroids.row(j);
      double spatial_d2 = 0.0;
      for (int s : spatial_slice) {
        double diff = ci[s] - cj[s];
        spatial_d2 += diff * diff;
      }
      if (spatial_d2 > radius2) continue;
      double channel_d2 = 0.0;
      for (int c : channel_slice) {
        double diff = ci[c] - cj[c];
        channel_d2 += diff * diff;
      }
      double channel_d = std::sqrt(channel_d2);
      double w = rbf_similarity(channel_d, alpha);
      if (!similarity_only) w *= channel_d;
      adjacency[i * k + j] = w;
      adjacency[j * k + i] = w;  // mirrored, so symmetry is exact
    }
  }
  return adjacency;
}

PcwGraph build_pcw_graph(const PointCloud& cloud, const FeatureSet& features,
                         const GraphConfig& config, int threads, ClusterSet* clusters_out) {
  if (features.size() != cloud.size())
    throw Error(ErrorCode::ShapeMismatch, "feature set does not match cloud");

  BoundingBox box = bounding_box(cloud);
  Vec3 extent = box.max_corner - box.min_corner;
  auto norm_coord = [](double v, double lo, double span) {
    return span > 0.0 ? (v - lo) / span : 0.0;
  };

  // clustering space: normalized perceptual channels, optionally with
  // 0.5-weighted normalized coordinates
  size_t cluster_dim = config.cluster_features_only ? 5 : 8;
  FeatureMatrix cluster_space;
  cluster_space.n = cloud.size();
  cluster_space.dim = cluster_dim;
  cluster_space.values.resize(cluster_space.n * cluster_dim);
  for (size_t i = 0; i < cloud.size(); ++i) {
    double* row = cluster_space.row(i);
    for (int c = 0; c < 5; ++c) row[c] = features.normalized(c, i);
    if (!config.cluster_features_only) {
      const Vec3& p = cloud.positions[i];
      row[5] = config.spatial_weight * norm_coord(p.x, box.min_corner.x, extent.x);
      row[6] = config.spatial_weight * norm_coord(p.y, box.min_corner.y, extent.y);
      row[7] = config.spatial_weight * norm_coord(p.z, box.min_corner.z, extent.z);
    }
  }

  ClusterSet clusters = kmeans(cluster_space, config.k, config.cluster_seed, config.max_iter,
                               threads);
  if (clusters_out) *clusters_out = clusters;

  // per-cluster rows for the adjacency build: normalized perceptual channels
  // plus model-unit coordinates for the radius mask
  FeatureMatrix mixed;
  mixed.n = cloud.size();
  mixed.dim = kNodeFeatureDim;
  mixed.values.resize(mixed.n * mixed.dim);
  for (size_t i = 0; i < cloud.size(); ++i) {
    double* row = mixed.row(i);
    for (int c = 0; c < 5; ++c) row[c] = features.normalized(c, i);
    row[kSpatialX] = cloud.positions[i].x;
    row[kSpatialY] = cloud.positions[i].y;
    row[kSpatialZ] = cloud.positions[i].z;
  }
  FeatureMatrix mixed_centroids = cluster_centroids(mixed, clusters);

  PcwGraph graph;
  graph.k = clusters.k;
  graph.cluster_radius = config.cluster_radius_frac * box.diagonal;
  graph.alpha = 0.15 * graph.cluster_radius;

  const std::vector<int> spatial{kSpatialX, kSpatialY, kSpatialZ};
  graph.adjacency_color =
      build_channel_adjacency(mixed_centroids, {kChannelL, kChannelA, kChannelB}, spatial,
                              graph.cluster_radius, graph.alpha, config.similarity_only);
  graph.adjacency_curvature =
      build_channel_adjacency(mixed_centroids, {kChannelCurvature}, spatial,
                              graph.cluster_radius, graph.alpha, config.similarity_only);
  graph.adjacency_saliency =
      build_channel_adjacency(mixed_centroids, {kChannelSaliency}, spatial,
                              graph.cluster_radius, graph.alpha, config.similarity_only);

  // node features keep every column in normalized units
  graph.node_features = mixed_centroids;
  for (size_t c = 0; c < graph.node_features.n; ++c) {
    double* row = graph.node_features.row(c);
    row[kSpatialX] = norm_coord(row[kSpatialX], box.min_corner.x, extent.x);
    row[kSpatialY] = norm_coord(row[kSpatialY], box.min_corner.y, extent.y);
    row[kSpatialZ] = norm_coord(row[kSpatialZ], box.min_corner.z, extent.z);
  }

  // isolated node in all three channels -> warning, not an error
  size_t k = static_cast<size_t>(graph.k);
  for (size_t i = 0; i < k && !graph.disconnected_warning; ++i) {
    bool any = false;
    for (size_t j = 0; j < k && !any; ++j) {
      any = graph.adjacency_color[i * k + j] != 0.0 ||
            graph.adjacency_curvature[i * k + j] != 0.0 ||
            graph.adjacency_saliency[i * k + j] != 0.0;
    }
    if (!any) graph.disconnected_warning = true;
  }
  return graph;
}

std::vector<uint8_t> graph_support_mask(const PcwGraph& graph) {
  size_t k = static_cast<size_t>(graph.k);
  std::vector<uint8_t> mask(k * k, 0);
  for (size_t i = 0; i < k; ++i) {
    mask[i * k + i] = 1;
    for (size_t j = 0; j < k; ++j) {
      if (graph.adjacency_color[i * k + j] != 0.0 ||
          graph.adjacency_curvature[i * k + j] != 0.0 ||
          graph.adjacency_saliency[i * k + j] != 0.0)
        mask[i * k + j] = 1;
    }
  }
  return mask;
}

std::string graph_header_json(const PcwGraph& graph) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "{\"k\": %d, \"cluster_radius\": %.17g, \"alpha\": %.17g}\n",
                graph.k, graph.cluster_radius, graph.alpha);
  return buf;
}

std::string adjacency_csv(const std::vector<double>& adjacency, int k) {
  std::string out;
  char buf[48];
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", adjacency[static_cast<size_t>(i) * k + j]);
      out += buf;
      out += (j + 1 < k) ? ',' : '\n';
    }
  }
  return out;
}

namespace {

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  uint64_t u;
  std::memcpy(&u, &v, 8);
  put_u64(out, u);
}

uint64_t get_u64(const std::string& in, size_t& pos) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(in[pos++])) << (8 * i);
  return v;
}

double get_f64(const std::string& in, size_t& pos) {
  uint64_t u = get_u64(in, pos);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

constexpr uint64_t kGraphMagic = 0x50435741474b3031ull;  // "PCWAGK01"

}  // namespace

std::string serialize_graph(const PcwGraph& graph) {
  std::string out;
  put_u64(out, kGraphMagic);
  put_u64(out, static_cast<uint64_t>(graph.k));
  put_f64(out, graph.cluster_radius);
  put_f64(out, graph.alpha);
  put_u64(out, graph.disconnected_warning ? 1 : 0);
  put_u64(out, graph.node_features.dim);
  for (double v : graph.node_features.values) put_f64(out, v);
  for (const auto* adj :
       {&graph.adjacency_color, &graph.adjacency_curvature, &graph.adjacency_saliency})
    for (double v : *adj) put_f64(out, v);
  return out;
}

PcwGraph deserialize_graph(const std::string& bytes) {
  size_t k2, expected;
  PcwGraph graph;
  size_t pos = 0;
  if (bytes.size() < 48 || get_u64(bytes, pos) != kGraphMagic)
    throw Error(ErrorCode::IoError, "not a graph cache blob");
  graph.k = static_cast<int>(get_u64(bytes, pos));
  graph.cluster_radius = get_f64(bytes, pos);
  graph.alpha = get_f64(bytes, pos);
  graph.disconnected_warning = get_u64(bytes, pos) != 0;
  size_t dim = get_u64(bytes, pos);
  size_t k = static_cast<size_t>(graph.k);
  k2 = k * k;
  expected = pos + 8 * (k * dim + 3 * k2);
  if (bytes.size() < expected) throw Error(ErrorCode::IoError, "truncated graph cache blob");
  graph.node_features.n = k;
  graph.node_features.dim = dim;
  graph.node_features.values.resize(k * dim);
  for (double& v : graph.node_features.values) v = get_f64(bytes, pos);
  graph.adjacency_color.resize(k2);
  graph.adjacency_curvature.resize(k2);
  graph.adjacency_saliency.resize(k2);
  for (auto* adj : {&graph.adjacency_color, &graph.adjacency_curvature, &graph.adjacency_saliency})
    for (double& v : *adj) v = get_f64(bytes, pos);
  return graph;
}

}  // namespace pcqa
