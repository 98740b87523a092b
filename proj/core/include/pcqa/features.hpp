#ifndef PCQA_FEATURES_HPP
#define PCQA_FEATURES_HPP

#include <cstdint>
#include <vector>

#include "pcqa/color.hpp"
#include "pcqa/error.hpp"
#include "pcqa/kdtree.hpp"
#include "pcqa/point_cloud.hpp"

namespace pcqa {

struct FeatureConfig {
  // Point-level neighborhood radius as a fraction of the bounding-box
  // diagonal. Drives covariance normals and curvature.
  double neighbor_radius_frac = 0.02;
  // Smoothing scales in model units. <= 0 selects the automatic rule
  // sigma1 = 2 * mean nearest-neighbor distance, sigma2 = 2 * sigma1.
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  // When a radius neighborhood has fewer than 4 points, this many nearest
  // neighbors are used instead.
  int knn_fallback = 16;

  void validate() const {
    if (!(neighbor_radius_frac > 0.0 && neighbor_radius_frac < 1.0))
      throw Error(ErrorCode::ConfigError, "neighbor_radius_frac must be in (0,1)");
    if (sigma1 > 0.0 || sigma2 > 0.0) {
      if (!(sigma1 > 0.0 && sigma2 > sigma1))
        throw Error(ErrorCode::ConfigError, "need 0 < sigma1 < sigma2");
    }
    if (knn_fallback < 4) throw Error(ErrorCode::ConfigError, "knn_fallback must be >= 4");
  }
};

struct FeatureWarnings {
  size_t degenerate_neighborhoods = 0;  // coincident neighbors, normal fell back to (0,0,1)
  bool missing_color = false;
};

// Per-point perceptual features: CIELAB color, eigenvalue-ratio curvature,
// two-scale saliency, plus the estimated unit normals. Channel min/max are
// kept so downstream stages can normalize to [0,1].
struct FeatureSet {
  std::vector<double> l, a, b;
  std::vector<double> curvature;  // in [0, 1/3]
  std::vector<double> saliency;   // >= 0
  std::vector<Vec3> normals;
  double channel_min[5] = {0, 0, 0, 0, 0};  // L, a, b, curvature, saliency
  double channel_max[5] = {0, 0, 0, 0, 0};
  FeatureWarnings warnings;

  size_t size() const { return curvature.size(); }

  // (x - min) / (max - min); constant channels map to 0.
  double normalized(int channel, size_t point) const {
    double v = channel == 0   ? l[point]
               : channel == 1 ? a[point]
               : channel == 2 ? b[point]
               : channel == 3 ? curvature[point]
                              : saliency[point];
    double lo = channel_min[channel], hi = channel_max[channel];
    return hi > lo ? (v - lo) / (hi - lo) : 0.0;
  }
};

// Exact set {j : ||p_j - p_query|| <= radius}, query included. Backed by a
// k-d tree but contractually equal to a brute-force scan.
std::vector<size_t> radius_neighbors(const KdTree3& index, const PointCloud& cloud,
                                     size_t query_index, double radius);

// Covariance normals: eigenvector of the smallest eigenvalue over the radius
// neighborhood (k-NN fallback below 4 points), oriented away from the cloud
// centroid. Coincident neighborhoods record a warning and yield (0,0,1).
std::vector<Vec3> estimate_normals(const PointCloud& cloud, const KdTree3& index,
                                   const FeatureConfig& config, double radius,
                                   FeatureWarnings* warnings = nullptr, int threads = 1);

// lambda3 / (lambda1 + lambda2 + lambda3) of the neighborhood covariance;
// 0 for degenerate neighborhoods (trace < 1e-12 or fewer than 3 points).
double point_curvature(const PointCloud& cloud, const KdTree3& index, size_t point_index,
                       double radius);

// Gaussian-weighted position average, kernel truncated at 6 sigma.
std::vector<Vec3> gaussian_smooth(const PointCloud& cloud, const KdTree3& index, double sigma,
                                  int threads = 1);

// |n_i . (g1(p_i) - g2(p_i))| with g1, g2 the smoothed positions at sigma1,
// sigma2.
std::vector<double> point_saliency(const PointCloud& cloud, const KdTree3& index,
                                   const std::vector<Vec3>& normals, double sigma1, double sigma2,
                                   int threads = 1);

FeatureSet extract_features(const PointCloud& cloud, const FeatureConfig& config,
                            int threads = 1);

// Automatic smoothing scale: 2 * mean nearest-neighbor distance.
double mean_nearest_neighbor_distance(const PointCloud& cloud, const KdTree3& index);

// CSV dump `index,L,a,b,curvature,saliency,nx,ny,nz` for inspection fixtures.
std::string feature_csv(const FeatureSet& features);

}  // namespace pcqa

#endif  // PCQA_FEATURES_HPP
