#ifndef PCQA_KMEANS_HPP
#define PCQA_KMEANS_HPP

#include <cstdint>
#include <vector>

namespace pcqa {

// Row-major feature matrix: n rows of dim values each.
struct FeatureMatrix {
  size_t n = 0;
  size_t dim = 0;
  std::vector<double> values;

  const double* row(size_t i) const { return values.data() + i * dim; }
  double* row(size_t i) { return values.data() + i * dim; }
};

struct ClusterSet {
  std::vector<int> assignments;   // per point, in [0, k)
  FeatureMatrix centroids;        // k rows
  int k = 0;
  double final_error = 0.0;
  int iterations_run = 0;
};

// Sum over clusters of squared distances to the assigned centroid.
double clustering_error(const FeatureMatrix& features, const std::vector<int>& assignments,
                        const FeatureMatrix& centroids);

// Lloyd's algorithm with k-means++ seeding. Deterministic for a given
// (features, k, seed, max_iter): ties in assignment go to the lowest centroid
// index, empty clusters are re-seeded with the point farthest from its
// centroid, and the centroid reduction runs in fixed point order. The
// assignment step may fan out over threads (each point is independent).
//
// iteration_errors, when given, receives the error after every completed
// Lloyd iteration (assignment + centroid update).
ClusterSet kmeans(const FeatureMatrix& features, int k, uint64_t seed, int max_iter,
                  int threads = 1, std::vector<double>* iteration_errors = nullptr);

}  // namespace pcqa

#endif  // PCQA_KMEANS_HPP
