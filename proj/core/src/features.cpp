#include "pcqa/features.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <string>

#include "pcqa/eig3.hpp"
#include "pcqa/threading.hpp"

namespace pcqa {

namespace {

// Centered covariance over a neighborhood, Eq.-style: averaged outer products
// of (p_j - centroid).
Sym3 neighborhood_covariance(const PointCloud& cloud, const std::vector<size_t>& neighbors) {
  Vec3 centroid{0, 0, 0};
  for (size_t j : neighbors) centroid += cloud.positions[j];
  centroid = centroid / static_cast<double>(neighbors.size());

  Sym3 cov;
  for (size_t j : neighbors) {
    Vec3 d = cloud.positions[j] - centroid;
    cov.xx += d.x * d.x;
    cov.xy += d.x * d.y;
    cov.xz += d.x * d.z;
    cov.yy += d.y * d.y;
    cov.yz += d.y * d.z;
    cov.zz += d.z * d.z;
  }
  double inv = 1.0 / static_cast<double>(neighbors.size());
  cov.xx *= inv; cov.xy *= inv; cov.xz *= inv;
  cov.yy *= inv; cov.yz *= inv; cov.zz *= inv;
  return cov;
}

}  // namespace

std::vector<size_t> radius_neighbors(const KdTree3& index, const PointCloud& cloud,
                                     size_t query_index, double radius) {
  return index.radius_indices(cloud.positions[query_index], radius);
}

std::vector<Vec3> estimate_normals(const PointCloud& cloud, const KdTree3& index,
                                   const FeatureConfig& config, double radius,
                                   FeatureWarnings* warnings, int threads) {
  size_t n = cloud.size();
  std::vector<Vec3> normals(n);

  Vec3 cloud_centroid{0, 0, 0};
  for (const Vec3& p : cloud.positions) cloud_centroid += p;
  cloud_centroid = cloud_centroid / static_cast<double>(n);

  std::atomic<size_t> degenerate{0};
  parallel_for(n, threads, [&](size_t i) {
    std::vector<size_t> neigh = index.radius_indices(cloud.positions[i], radius);
    if (neigh.size() < 4)
      neigh = index.nearest(cloud.positions[i], static_cast<size_t>(config.knn_fallback));

    Sym3 cov = neighborhood_covariance(cloud, neigh);
    // coincident neighbors leave only summation round-off in the covariance
    if (cov.trace() <= 1e-24 * std::max(1.0, cloud.positions[i].squared_norm())) {
      normals[i] = {0.0, 0.0, 1.0};
      degenerate.fetch_add(1, std::memory_order_relaxed);
      return;
    }
    EigenTriple ev = sym3_eigenvalues(cov);
    Vec3 normal = sym3_smallest_eigenvector(cov, ev);
    Vec3 outward = cloud.positions[i] - cloud_centroid;
    if (normal.dot(outward) < 0.0) normal = normal * -1.0;
    normals[i] = normal;
  });
  if (warnings) warnings->degenerate_neighborhoods += degenerate.load();
  return normals;
}

double point_curvature(const PointCloud& cloud, const KdTree3& index, size_t point_index,
                       double radius) {
  std::vector<size_t> neigh = index.radius_indices(cloud.positions[point_index], radius);
  if (neigh.size() < 3) return 0.0;
  Sym3 cov = neighborhood_covariance(cloud, neigh);
  EigenTriple ev = sym3_eigenvalues(cov);
  double total = ev.lambda1 + ev.lambda2 + ev.lambda3;
  if (total < 1e-12) return 0.0;
  return ev.lambda3 / total;
}

std::vector<Vec3> gaussian_smooth(const PointCloud& cloud, const KdTree3& index, double sigma,
                                  int threads) {
  size_t n = cloud.size();
  std::vector<Vec3> smoothed(n);
  // 6 sigma: dropped weights are below exp(-18), so the truncated mean stays
  // within 1e-6 of the full kernel even when sigma rivals the cloud extent
  double truncation = 6.0 * sigma;
  double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
  parallel_for(n, threads, [&](size_t i) {
    const Vec3& p = cloud.positions[i];
    std::vector<size_t> neigh = index.radius_indices(p, truncation);
    Vec3 acc{0, 0, 0};
    double wsum = 0.0;
    for (size_t j : neigh) {
      double w = std::exp(-squared_distance(p, cloud.positions[j]) * inv_two_sigma2);
      acc += cloud.positions[j] * w;
      wsum += w;
    }
    // the point itself is always in range with weight 1, so wsum >= 1
    smoothed[i] = acc / wsum;
  });
  return smoothed;
}

std::vector<double> point_saliency(const PointCloud& cloud, const KdTree3& index,
                                   const std::vector<Vec3>& normals, double sigma1, double sigma2,
                                   int threads) {
  std::vector<Vec3> g1 = gaussian_smooth(cloud, index, sigma1, threads);
  std::vector<Vec3> g2 = gaussian_smooth(cloud, index, sigma2, threads);
  std::vector<double> sal(cloud.size());
  for (size_t i = 0; i < cloud.size(); ++i) sal[i] = std::abs(normals[i].dot(g1[i] - g2[i]));
  return sal;
}

double mean_nearest_neighbor_distance(const PointCloud& cloud, const KdTree3& index) {
  size_t n = cloud.size();
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    auto two = index.nearest(cloud.positions[i], 2);  // self plus nearest other
    double d = 0.0;
    for (size_t j : two)
      if (j != i) d = distance(cloud.positions[i], cloud.positions[j]);
    sum += d;
  }
  return sum / static_cast<double>(n);
}

FeatureSet extract_features(const PointCloud& cloud, const FeatureConfig& config, int threads) {
  cloud.validate();
  config.validate();

  KdTree3 index(cloud.positions);
  BoundingBox box = bounding_box(cloud);
  double radius = config.neighbor_radius_frac * box.diagonal;
  if (radius <= 0.0) radius = 1e-9;  // single-point or coincident cloud

  double sigma1 = config.sigma1, sigma2 = config.sigma2;
  if (sigma1 <= 0.0 || sigma2 <= 0.0) {
    double mean_nn = mean_nearest_neighbor_distance(cloud, index);
    if (mean_nn <= 0.0) mean_nn = radius > 0.0 ? radius : 1e-9;
    sigma1 = 2.0 * mean_nn;
    sigma2 = 2.0 * sigma1;
  }

  FeatureSet fs;
  size_t n = cloud.size();
  fs.l.resize(n);
  fs.a.resize(n);
  fs.b.resize(n);
  fs.curvature.resize(n);

  if (cloud.has_colors()) {
    for (size_t i = 0; i < n; ++i) {
      Lab lab = rgb_to_lab(cloud.colors[i]);
      fs.l[i] = lab.l;
      fs.a[i] = lab.a;
      fs.b[i] = lab.b;
    }
  } else {
    fs.warnings.missing_color = true;
    for (size_t i = 0; i < n; ++i) {
      fs.l[i] = 50.0;
      fs.a[i] = 0.0;
      fs.b[i] = 0.0;
    }
  }

  fs.normals = estimate_normals(cloud, index, config, radius, &fs.warnings, threads);

  parallel_for(n, threads, [&](size_t i) {
    fs.curvature[i] = point_curvature(cloud, index, i, radius);
  });

  fs.saliency = point_saliency(cloud, index, fs.normals, sigma1, sigma2, threads);

  for (int c = 0; c < 5; ++c) {
    const std::vector<double>& ch = c == 0   ? fs.l
                                    : c == 1 ? fs.a
                                    : c == 2 ? fs.b
                                    : c == 3 ? fs.curvature
                                             : fs.saliency;
    double lo = ch[0], hi = ch[0];
    for (double v : ch) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    fs.channel_min[c] = lo;
    fs.channel_max[c] = hi;
  }
  return fs;
}

std::string feature_csv(const FeatureSet& features) {
  std::string out = "index,L,a,b,curvature,saliency,nx,ny,nz\n";
  char buf[256];
  for (size_t i = 0; i < features.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", i,
                  features.l[i], features.a[i], features.b[i], features.curvature[i],
                  features.saliency[i], features.normals[i].x, features.normals[i].y,
                  features.normals[i].z);
    out += buf;
  }
  return out;
}

}  // namespace pcqa
