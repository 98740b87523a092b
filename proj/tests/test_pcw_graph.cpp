#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "pcqa/pcw_graph.hpp"

using namespace pcqa;

namespace {

FeatureMatrix matrix_of(const std::vector<std::vector<double>>& rows) {
  FeatureMatrix m;
  m.n = rows.size();
  m.dim = rows.empty() ? 0 : rows[0].size();
  for (const auto& r : rows) m.values.insert(m.values.end(), r.begin(), r.end());
  return m;
}

}  // namespace

TEST_CASE("cluster_centroids") {
  // singleton cluster keeps its feature vector
  FeatureMatrix f1 = matrix_of({{0.25, 0.75, 0.5}});
  ClusterSet c1;
  c1.k = 1;
  c1.assignments = {0};
  FeatureMatrix r1 = cluster_centroids(f1, c1);
  CHECK(r1.values == f1.values);

  // mean of a zero vector and a ones vector
  FeatureMatrix f2 = matrix_of({{0, 0, 0}, {1, 1, 1}});
  ClusterSet c2;
  c2.k = 1;
  c2.assignments = {0, 0};
  FeatureMatrix r2 = cluster_centroids(f2, c2);
  for (double v : r2.values) CHECK(v == 0.5);

  // random clusters against a naive per-cluster mean
  Rng rng(91);
  FeatureMatrix features;
  features.n = 70;
  features.dim = 4;
  features.values.resize(70 * 4);
  for (double& v : features.values) v = rng.next_double();
  ClusterSet clusters;
  clusters.k = 5;
  clusters.assignments.resize(70);
  for (size_t i = 0; i < 70; ++i) clusters.assignments[i] = static_cast<int>(i % 5);
  FeatureMatrix got = cluster_centroids(features, clusters);
  for (int c = 0; c < 5; ++c) {
    std::vector<double> mean(4, 0.0);
    size_t count = 0;
    for (size_t i = 0; i < 70; ++i) {
      if (clusters.assignments[i] != c) continue;
      for (size_t d = 0; d < 4; ++d) mean[d] += features.row(i)[d];
      ++count;
    }
    for (size_t d = 0; d < 4; ++d)
      CHECK(got.row(static_cast<size_t>(c))[d] ==
            doctest::Approx(mean[d] / static_cast<double>(count)).epsilon(1e-12));
  }

  // defensive empty-cluster check
  ClusterSet holey;
  holey.k = 3;
  holey.assignments.assign(70, 0);
  CHECK_THROWS_AS(cluster_centroids(features, holey), Error);
}

TEST_CASE("rbf_similarity values") {
  CHECK(rbf_similarity(0.0, 0.5) == 1.0);
  CHECK(rbf_similarity(2.0 * 0.15 * 0.15, 0.15) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  // high-precision frozen value for alpha = 0.15, distance = 0.1
  long double expected = expl(-0.1L / (2.0L * 0.15L * 0.15L));
  CHECK(rbf_similarity(0.1, 0.15) ==
        doctest::Approx(static_cast<double>(expected)).epsilon(1e-12));
  CHECK(rbf_similarity(0.1, 0.15) == doctest::Approx(0.108368023221896).epsilon(1e-9));
}

TEST_CASE("build_channel_adjacency branches") {
  // rows: [channel c0, c1 | spatial x y z]
  std::vector<int> channel{0, 1};
  std::vector<int> spatial{2, 3, 4};

  // pair beyond the radius gets zero weight
  FeatureMatrix far_apart = matrix_of({{0.1, 0.2, 0, 0, 0}, {0.3, 0.4, 10, 0, 0}});
  auto w_far = build_channel_adjacency(far_apart, channel, spatial, 1.0, 0.15);
  CHECK(w_far == std::vector<double>{0, 0, 0, 0});

  // identical channel sub-vectors in range: similarity 1 times distance 0
  FeatureMatrix same = matrix_of({{0.1, 0.2, 0, 0, 0}, {0.1, 0.2, 0.5, 0, 0}});
  auto w_same = build_channel_adjacency(same, channel, spatial, 1.0, 0.15);
  CHECK(w_same[1] == 0.0);

  // channel distance 0.2 at alpha 0.15, in range
  FeatureMatrix pair = matrix_of({{0.0, 0.0, 0, 0, 0}, {0.2, 0.0, 0.5, 0, 0}});
  auto w = build_channel_adjacency(pair, channel, spatial, 1.0, 0.15);
  long double expected = expl(-0.2L / (2.0L * 0.15L * 0.15L)) * 0.2L;
  CHECK(w[1] == doctest::Approx(static_cast<double>(expected)).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(0.002348725691404).epsilon(1e-9));
  CHECK(w[1] == w[2]);
  CHECK(w[0] == 0.0);
  CHECK(w[3] == 0.0);

  // similarity-only mode drops the distance factor
  auto w_sim = build_channel_adjacency(pair, channel, spatial, 1.0, 0.15, true);
  CHECK(w_sim[1] == doctest::Approx(static_cast<double>(expl(-0.2L / 0.045L))).epsilon(1e-12));
}

TEST_CASE("three-cluster fixture matches hand-computed weights") {
  // hand-placed centroids: normalized 5-channel block + model-unit spatial
  // cluster 0 and 1 within radius of each other, cluster 2 only near 1
  std::vector<std::vector<double>> rows = {
      {0.1, 0.2, 0.3, 0.4, 0.5, 0.0, 0.0, 0.0},
      {0.4, 0.1, 0.5, 0.2, 0.9, 0.8, 0.0, 0.0},
      {0.9, 0.8, 0.1, 0.6, 0.3, 1.4, 0.6, 0.0},
  };
  FeatureMatrix centroids = matrix_of(rows);
  double radius = 1.0;
  double alpha = 0.15 * radius;

  auto dist = [&](int i, int j, std::vector<int> cols) {
    long double acc = 0.0L;
    for (int c : cols) {
      long double diff = static_cast<long double>(rows[static_cast<size_t>(i)][static_cast<size_t>(c)]) -
                         rows[static_cast<size_t>(j)][static_cast<size_t>(c)];
      acc += diff * diff;
    }
    return sqrtl(acc);
  };
  auto weight = [&](int i, int j, std::vector<int> cols) {
    long double spatial = dist(i, j, {5, 6, 7});
    if (spatial > radius) return 0.0L;
    long double d = dist(i, j, cols);
    return expl(-d / (2.0L * static_cast<long double>(alpha) * alpha)) * d;
  };

  std::vector<std::vector<int>> slices = {{0, 1, 2}, {3}, {4}};
  for (size_t ch = 0; ch < slices.size(); ++ch) {
    auto got = build_channel_adjacency(centroids, slices[ch], {5, 6, 7}, radius, alpha);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double want = i == j ? 0.0 : static_cast<double>(weight(i, j, slices[ch]));
        CHECK(got[static_cast<size_t>(i) * 3 + j] == doctest::Approx(want).epsilon(1e-9));
      }
  }
  // spatial distances: 0-1 = 0.8 (in), 1-2 = sqrt(0.36+0.36) ~ 0.849 (in),
  // 0-2 = sqrt(1.96+0.36) ~ 1.523 (out); assert the mask really differs
  auto color = build_channel_adjacency(centroids, {0, 1, 2}, {5, 6, 7}, radius, alpha);
  CHECK(color[0 * 3 + 1] > 0.0);
  CHECK(color[1 * 3 + 2] > 0.0);
  CHECK(color[0 * 3 + 2] == 0.0);
}

TEST_CASE("build_pcw_graph on synthetic clouds") {
  PointCloud cloud = helpers::random_cloud(400, 23);
  FeatureSet features = extract_features(cloud, FeatureConfig{});
  GraphConfig config;
  config.k = 8;
  PcwGraph graph = build_pcw_graph(cloud, features, config);
  CHECK(graph.k == 8);
  CHECK(graph.node_features.n == 8);
  CHECK(graph.node_features.dim == kNodeFeatureDim);
  CHECK(graph.alpha == doctest::Approx(0.15 * graph.cluster_radius).epsilon(1e-15));

  size_t k = 8;
  for (int c = 0; c < 3; ++c) {
    const auto& adj = graph.adjacency(c);
    for (size_t i = 0; i < k; ++i) {
      CHECK(adj[i * k + i] == 0.0);
      for (size_t j = 0; j < k; ++j) {
        CHECK(adj[i * k + j] == adj[j * k + i]);  // exact symmetry
        CHECK(adj[i * k + j] >= 0.0);
      }
    }
  }

  // node features are normalized
  for (double v : graph.node_features.values) {
    CHECK(v >= -1e-12);
    CHECK(v <= 1.0 + 1e-12);
  }
}

TEST_CASE("two isolated clusters produce a warning, zero adjacency") {
  PointCloud cloud;
  Rng rng(29);
  // two tight far-apart clumps; radius fraction small enough to isolate them
  for (int i = 0; i < 30; ++i)
    cloud.positions.push_back({rng.next_double() * 0.01, rng.next_double() * 0.01, 0.0});
  for (int i = 0; i < 30; ++i)
    cloud.positions.push_back({10.0 + rng.next_double() * 0.01, 0.0, rng.next_double() * 0.01});
  FeatureSet features = extract_features(cloud, FeatureConfig{});
  GraphConfig config;
  config.k = 2;
  config.cluster_radius_frac = 0.05;
  PcwGraph graph = build_pcw_graph(cloud, features, config);
  CHECK(graph.disconnected_warning);
  for (int c = 0; c < 3; ++c)
    for (double v : graph.adjacency(c)) CHECK(v == 0.0);

  // support mask still carries self-loops
  auto mask = graph_support_mask(graph);
  CHECK(mask == std::vector<uint8_t>{1, 0, 0, 1});
}

TEST_CASE("support sharing and scale behavior") {
  for (uint64_t seed : {501ull, 502ull, 503ull}) {
    PointCloud cloud = helpers::random_cloud(300, seed);
    FeatureSet features = extract_features(cloud, FeatureConfig{});
    GraphConfig config;
    config.k = 6;
    PcwGraph graph = build_pcw_graph(cloud, features, config);
    size_t k = 6;
    // X1..X3 share the spatial mask: once any channel connects a pair, a zero
    // in another channel can only come from a zero channel distance
    auto channel_distance = [&](size_t i, size_t j, std::vector<int> cols) {
      double acc = 0.0;
      for (int c : cols) {
        double diff = graph.node_features.row(i)[static_cast<size_t>(c)] -
                      graph.node_features.row(j)[static_cast<size_t>(c)];
        acc += diff * diff;
      }
      return std::sqrt(acc);
    };
    for (size_t i = 0; i < k; ++i)
      for (size_t j = 0; j < k; ++j) {
        if (i == j) continue;
        size_t e = i * k + j;
        bool any = graph.adjacency_color[e] != 0.0 || graph.adjacency_curvature[e] != 0.0 ||
                   graph.adjacency_saliency[e] != 0.0;
        if (!any) continue;
        if (graph.adjacency_color[e] == 0.0) CHECK(channel_distance(i, j, {0, 1, 2}) == 0.0);
        if (graph.adjacency_curvature[e] == 0.0) CHECK(channel_distance(i, j, {3}) == 0.0);
        if (graph.adjacency_saliency[e] == 0.0) CHECK(channel_distance(i, j, {4}) == 0.0);
      }

    // uniform scaling: radius scales, the connection pattern does not change
    PointCloud scaled = cloud;
    for (Vec3& p : scaled.positions) p = p * 7.5;
    FeatureSet scaled_features = extract_features(scaled, FeatureConfig{});
    PcwGraph scaled_graph = build_pcw_graph(scaled, scaled_features, config);
    CHECK(scaled_graph.cluster_radius ==
          doctest::Approx(7.5 * graph.cluster_radius).epsilon(1e-9));
    CHECK(graph_support_mask(scaled_graph) == graph_support_mask(graph));
  }
}

TEST_CASE("graph serialization round trip") {
  PointCloud cloud = helpers::random_cloud(200, 37);
  FeatureSet features = extract_features(cloud, FeatureConfig{});
  GraphConfig config;
  config.k = 5;
  PcwGraph graph = build_pcw_graph(cloud, features, config);
  PcwGraph back = deserialize_graph(serialize_graph(graph));
  CHECK(back.k == graph.k);
  CHECK(back.cluster_radius == graph.cluster_radius);
  CHECK(back.alpha == graph.alpha);
  CHECK(back.node_features.values == graph.node_features.values);
  CHECK(back.adjacency_color == graph.adjacency_color);
  CHECK(back.adjacency_curvature == graph.adjacency_curvature);
  CHECK(back.adjacency_saliency == graph.adjacency_saliency);

  std::string header = graph_header_json(graph);
  CHECK(header.find("\"k\": 5") != std::string::npos);
  CHECK(header.find("cluster_radius") != std::string::npos);
  CHECK(header.find("alpha") != std::string::npos);
}
