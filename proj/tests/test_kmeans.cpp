#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "pcqa/kmeans.hpp"

using namespace pcqa;

namespace {

FeatureMatrix matrix_of(const std::vector<std::vector<double>>& rows) {
  FeatureMatrix m;
  m.n = rows.size();
  m.dim = rows.empty() ? 0 : rows[0].size();
  for (const auto& r : rows) m.values.insert(m.values.end(), r.begin(), r.end());
  return m;
}

FeatureMatrix random_features(size_t n, size_t dim, uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix m;
  m.n = n;
  m.dim = dim;
  m.values.resize(n * dim);
  for (double& v : m.values) v = rng.next_double();
  return m;
}

}  // namespace

TEST_CASE("clustering_error basics and oracle") {
  FeatureMatrix one = matrix_of({{1.0, 2.0}});
  FeatureMatrix c_same = matrix_of({{1.0, 2.0}});
  CHECK(clustering_error(one, {0}, c_same) == 0.0);

  // two points at distance 2 sharing the midpoint centroid
  FeatureMatrix two = matrix_of({{0.0}, {2.0}});
  FeatureMatrix mid = matrix_of({{1.0}});
  CHECK(clustering_error(two, {0, 0}, mid) == doctest::Approx(2.0).epsilon(1e-15));

  // random instance against a long-double summation
  FeatureMatrix features = random_features(97, 6, 311);
  FeatureMatrix centroids = random_features(5, 6, 312);
  std::vector<int> assign(features.n);
  Rng rng(313);
  for (int& a : assign) a = static_cast<int>(rng.next_below(5));
  long double expected = 0.0L;
  for (size_t i = 0; i < features.n; ++i)
    for (size_t d = 0; d < features.dim; ++d) {
      long double diff = static_cast<long double>(features.row(i)[d]) -
                         centroids.row(static_cast<size_t>(assign[i]))[d];
      expected += diff * diff;
    }
  CHECK(clustering_error(features, assign, centroids) ==
        doctest::Approx(static_cast<double>(expected)).epsilon(1e-9));

  FeatureMatrix wrong_dim = random_features(5, 4, 314);
  CHECK_THROWS_AS(clustering_error(features, assign, wrong_dim), Error);
}

TEST_CASE("kmeans: singleton clusters when k equals n") {
  FeatureMatrix features = random_features(12, 3, 321);
  ClusterSet clusters = kmeans(features, 12, 1, 50);
  CHECK(clusters.final_error == doctest::Approx(0.0).epsilon(1e-18));
  std::vector<bool> seen(12, false);
  for (int a : clusters.assignments) seen[static_cast<size_t>(a)] = true;
  for (bool s : seen) CHECK(s);
}

TEST_CASE("kmeans: two antipodal points split into their own clusters") {
  FeatureMatrix features = matrix_of({{1.0, 0.0}, {-1.0, 0.0}});
  ClusterSet clusters = kmeans(features, 2, 7, 10);
  CHECK(clusters.assignments[0] != clusters.assignments[1]);
  CHECK(clusters.final_error == 0.0);
  CHECK_THROWS_AS(kmeans(features, 1, 7, 10), Error);  // k >= 2 is a precondition
}

TEST_CASE("kmeans separates two well-spaced blobs") {
  Rng rng(331);
  FeatureMatrix features;
  features.n = 100;
  features.dim = 3;
  features.values.resize(300);
  // blob A near origin, blob B near (10,10,10); spread 0.5
  for (size_t i = 0; i < 100; ++i) {
    double base = i < 50 ? 0.0 : 10.0;
    for (size_t d = 0; d < 3; ++d)
      features.row(i)[d] = base + (rng.next_double() - 0.5);
  }
  ClusterSet clusters = kmeans(features, 2, 17, 100);
  for (size_t i = 1; i < 50; ++i) CHECK(clusters.assignments[i] == clusters.assignments[0]);
  for (size_t i = 51; i < 100; ++i) CHECK(clusters.assignments[i] == clusters.assignments[50]);
  CHECK(clusters.assignments[0] != clusters.assignments[50]);

  // the blob means are the optimal 2-centroid solution; compare errors
  FeatureMatrix blob_means;
  blob_means.n = 2;
  blob_means.dim = 3;
  blob_means.values.assign(6, 0.0);
  for (size_t i = 0; i < 100; ++i)
    for (size_t d = 0; d < 3; ++d) blob_means.row(i < 50 ? 0 : 1)[d] += features.row(i)[d] / 50.0;
  std::vector<int> blob_assign(100);
  for (size_t i = 0; i < 100; ++i) blob_assign[i] = i < 50 ? 0 : 1;
  double oracle_error = clustering_error(features, blob_assign, blob_means);
  CHECK(clusters.final_error == doctest::Approx(oracle_error).epsilon(1e-6));
}

TEST_CASE("kmeans error trace is monotone non-increasing") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    FeatureMatrix features = random_features(120, 5, 400 + seed);
    std::vector<double> errors;
    kmeans(features, 8, seed, 60, 1, &errors);
    for (size_t i = 1; i < errors.size(); ++i) CHECK(errors[i] <= errors[i - 1] + 1e-9);
  }
}

TEST_CASE("kmeans is deterministic and permutation consistent") {
  FeatureMatrix features = random_features(80, 4, 345);
  ClusterSet a = kmeans(features, 6, 99, 100);
  ClusterSet b = kmeans(features, 6, 99, 100);
  CHECK(a.assignments == b.assignments);
  CHECK(a.centroids.values == b.centroids.values);
  CHECK(a.final_error == b.final_error);

  // permuting the input rows must permute assignments identically
  FeatureMatrix reversed;
  reversed.n = features.n;
  reversed.dim = features.dim;
  reversed.values.resize(features.values.size());
  for (size_t i = 0; i < features.n; ++i)
    std::copy(features.row(features.n - 1 - i), features.row(features.n - 1 - i) + features.dim,
              reversed.row(i));
  ClusterSet c = kmeans(reversed, 6, 99, 100);
  // cluster labels may differ; compare the induced partitions via co-membership
  auto same_cluster = [](const ClusterSet& cs, size_t i, size_t j) {
    return cs.assignments[i] == cs.assignments[j];
  };
  Rng rng(346);
  for (int trial = 0; trial < 256; ++trial) {
    size_t i = static_cast<size_t>(rng.next_below(features.n));
    size_t j = static_cast<size_t>(rng.next_below(features.n));
    CHECK(same_cluster(a, i, j) ==
          same_cluster(c, features.n - 1 - i, features.n - 1 - j));
  }
}

TEST_CASE("kmeans rejects bad input") {
  FeatureMatrix features = random_features(5, 2, 347);
  CHECK_THROWS_AS(kmeans(features, 6, 1, 10), Error);  // k > n
  features.values[3] = std::nan("");
  CHECK_THROWS_AS(kmeans(features, 2, 1, 10), Error);  // non-finite
}

TEST_CASE("kmeans final_error matches a recomputation") {
  FeatureMatrix features = random_features(150, 8, 348);
  ClusterSet clusters = kmeans(features, 10, 5, 100);
  CHECK(clusters.final_error ==
        doctest::Approx(clustering_error(features, clusters.assignments, clusters.centroids))
            .epsilon(1e-12));
  CHECK(clusters.iterations_run >= 1);
  // no empty clusters
  std::vector<int> counts(10, 0);
  for (int a : clusters.assignments) counts[static_cast<size_t>(a)]++;
  for (int c : counts) CHECK(c >= 1);
}
