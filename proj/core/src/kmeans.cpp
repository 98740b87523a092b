#include "pcqa/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pcqa/error.hpp"
#include "pcqa/rng.hpp"
#include "pcqa/threading.hpp"

namespace pcqa {

namespace {

double squared_dist(const double* a, const double* b, size_t dim) {
  double acc = 0.0;
  for (size_t d = 0; d < dim; ++d) {
    double diff = a[d] - b[d];
    acc += diff * diff;
  }
  return acc;
}

// Every data-dependent choice below is keyed on point VALUES rather than
// positions, so permuting the input rows permutes the result without changing
// it. Keys hash the features on a 2^-26 grid: coarse enough that last-ulp
// noise (e.g. from normalizing a rigidly translated cloud) almost never
// changes a key, fine enough to separate distinct points.
struct PointKeys {
  std::vector<uint64_t> hash;   // quantized-value hash, seed-mixed
  std::vector<size_t> order;    // ids sorted by (hash, exact row)

  PointKeys(const FeatureMatrix& features, uint64_t seed) {
    hash.resize(features.n);
    std::vector<int64_t> quantized(features.dim);
    for (size_t i = 0; i < features.n; ++i) {
      const double* row = features.row(i);
      for (size_t d = 0; d < features.dim; ++d)
        quantized[d] = llround(row[d] * 67108864.0);  // 2^26
      hash[i] = fnv1a64(quantized.data(), features.dim * sizeof(int64_t),
                        0xcbf29ce484222325ull ^ (seed * 0x9e3779b97f4a7c15ull + 1));
    }
    order.resize(features.n);
    std::iota(order.begin(), order.end(), size_t{0});
    const FeatureMatrix& f = features;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      if (hash[a] != hash[b]) return hash[a] < hash[b];
      return std::lexicographical_compare(f.row(a), f.row(a) + f.dim, f.row(b),
                                          f.row(b) + f.dim);
    });
  }

  // value-keyed strict ordering used to break score ties deterministically
  bool before(const FeatureMatrix& f, size_t a, size_t b) const {
    if (hash[a] != hash[b]) return hash[a] < hash[b];
    return std::lexicographical_compare(f.row(a), f.row(a) + f.dim, f.row(b), f.row(b) + f.dim);
  }
};

double gumbel_of(uint64_t point_hash, uint64_t round) {
  uint64_t z = point_hash ^ (0x9e3779b97f4a7c15ull * (round + 1));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  z ^= z >> 31;
  double u = (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
  return -std::log(-std::log(u));
}

// k-means++ by the Gumbel-max route: sampling proportional to best_d2 equals
// taking the argmax of log(best_d2) + Gumbel, with the noise keyed on each
// point's value hash. No sweep order enters the choice.
FeatureMatrix seed_centroids(const FeatureMatrix& features, int k, const PointKeys& keys) {
  FeatureMatrix centroids;
  centroids.n = static_cast<size_t>(k);
  centroids.dim = features.dim;
  centroids.values.resize(centroids.n * centroids.dim);

  auto pick_argmax = [&](const std::vector<double>& score) {
    size_t best = 0;
    bool first = true;
    for (size_t i = 0; i < features.n; ++i) {
      if (first || score[i] > score[best] ||
          (score[i] == score[best] && keys.before(features, i, best))) {
        best = i;
        first = false;
      }
    }
    return best;
  };

  std::vector<double> score(features.n);
  for (size_t i = 0; i < features.n; ++i) score[i] = gumbel_of(keys.hash[i], 0);
  size_t first = pick_argmax(score);
  std::copy(features.row(first), features.row(first) + features.dim, centroids.row(0));

  std::vector<double> best_d2(features.n, std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    const double* prev = centroids.row(static_cast<size_t>(c - 1));
    double total = 0.0;
    for (size_t i = 0; i < features.n; ++i) {
      double d2 = squared_dist(features.row(i), prev, features.dim);
      if (d2 < best_d2[i]) best_d2[i] = d2;
      total += best_d2[i];
    }
    for (size_t i = 0; i < features.n; ++i) {
      double g = gumbel_of(keys.hash[i], static_cast<uint64_t>(c));
      // duplicates of existing centroids stay eligible only when everything
      // coincides (total == 0): the pure-noise score then picks any duplicate
      score[i] = total > 0.0
                     ? (best_d2[i] > 0.0 ? std::log(best_d2[i]) + g
                                         : -std::numeric_limits<double>::infinity())
                     : g;
    }
    size_t chosen = pick_argmax(score);
    std::copy(features.row(chosen), features.row(chosen) + features.dim,
              centroids.row(static_cast<size_t>(c)));
  }
  return centroids;
}

}  // namespace

double clustering_error(const FeatureMatrix& features, const std::vector<int>& assignments,
                        const FeatureMatrix& centroids) {
  if (assignments.size() != features.n || centroids.dim != features.dim)
    throw Error(ErrorCode::ShapeMismatch, "clustering_error input shapes disagree");
  double total = 0.0;
  for (size_t i = 0; i < features.n; ++i) {
    int c = assignments[i];
    if (c < 0 || static_cast<size_t>(c) >= centroids.n)
      throw Error(ErrorCode::ShapeMismatch, "assignment index out of range");
    total += squared_dist(features.row(i), centroids.row(static_cast<size_t>(c)), features.dim);
  }
  return total;
}

ClusterSet kmeans(const FeatureMatrix& features, int k, uint64_t seed, int max_iter, int threads,
                  std::vector<double>* iteration_errors) {
  if (k < 2) throw Error(ErrorCode::ConfigError, "kmeans requires k >= 2");
  if (static_cast<size_t>(k) > features.n)
    throw Error(ErrorCode::TooFewPoints, "k=" + std::to_string(k) + " exceeds point count " +
                                             std::to_string(features.n));
  if (max_iter < 1) throw Error(ErrorCode::ConfigError, "max_iter must be >= 1");
  for (double v : features.values)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteFeature, "non-finite feature value");

  PointKeys keys(features, seed);
  ClusterSet result;
  result.k = k;
  result.centroids = seed_centroids(features, k, keys);
  result.assignments.assign(features.n, -1);

  size_t dim = features.dim;
  std::vector<int> counts(static_cast<size_t>(k));

  for (int iter = 0; iter < max_iter; ++iter) {
    // assignment: nearest centroid, ties to the lowest index
    std::vector<int> next(features.n);
    parallel_for(features.n, threads, [&](size_t i) {
      const double* f = features.row(i);
      int best = 0;
      double best_d2 = squared_dist(f, result.centroids.row(0), dim);
      for (int c = 1; c < k; ++c) {
        double d2 = squared_dist(f, result.centroids.row(static_cast<size_t>(c)), dim);
        if (d2 < best_d2) {
          best_d2 = d2;
          best = c;
        }
      }
      next[i] = best;
    });

    bool changed = next != result.assignments;
    result.assignments = std::move(next);

    // centroid update; the summation sweeps the value-sorted order so the
    // rounding is identical under input permutation
    std::fill(result.centroids.values.begin(), result.centroids.values.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (size_t pos = 0; pos < features.n; ++pos) {
      size_t i = keys.order[pos];
      int c = result.assignments[i];
      double* dst = result.centroids.row(static_cast<size_t>(c));
      const double* src = features.row(i);
      for (size_t d = 0; d < dim; ++d) dst[d] += src[d];
      ++counts[static_cast<size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<size_t>(c)] == 0) continue;
      double inv = 1.0 / counts[static_cast<size_t>(c)];
      double* row = result.centroids.row(static_cast<size_t>(c));
      for (size_t d = 0; d < dim; ++d) row[d] *= inv;
    }

    // re-seed empty clusters with the point farthest from its centroid
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<size_t>(c)] != 0) continue;
      size_t farthest = 0;
      double farthest_d2 = -1.0;
      bool found = false;
      for (size_t i = 0; i < features.n; ++i) {
        int a = result.assignments[i];
        if (counts[static_cast<size_t>(a)] <= 1) continue;  // don't orphan another cluster
        double d2 = squared_dist(features.row(i),
                                 result.centroids.row(static_cast<size_t>(a)), dim);
        if (d2 > farthest_d2 ||
            (d2 == farthest_d2 && found && keys.before(features, i, farthest))) {
          farthest_d2 = d2;
          farthest = i;
          found = true;
        }
      }
      if (!found) continue;
      int old = result.assignments[farthest];
      --counts[static_cast<size_t>(old)];
      ++counts[static_cast<size_t>(c)];
      result.assignments[farthest] = c;
      std::copy(features.row(farthest), features.row(farthest) + dim,
                result.centroids.row(static_cast<size_t>(c)));
      // donor centroid stays as computed; the next iteration re-balances
      changed = true;
    }

    ++result.iterations_run;
    if (iteration_errors)
      iteration_errors->push_back(
          clustering_error(features, result.assignments, result.centroids));
    if (!changed) break;
  }

  result.final_error = clustering_error(features, result.assignments, result.centroids);
  return result;
}

}  // namespace pcqa
