// Independent reference implementations the tests check the library against.
// These deliberately avoid the code paths under test: the eigen oracle is a
// classical largest-pivot Jacobi (the library uses a closed form with a
// cyclic-Jacobi fallback), correlation oracles count pairs in O(n^2), the
// smoothing oracle skips the kernel truncation, and the Adam oracle is a
// straight transcription of the update rule.

#ifndef PCQA_TESTS_ORACLES_HPP
#define PCQA_TESTS_ORACLES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "pcqa/geometry.hpp"

namespace oracles {

// --- symmetric 3x3 eigenvalues, classical Jacobi with pivot selection ------

inline std::array<double, 3> jacobi_eigenvalues(std::array<std::array<double, 3>, 3> a) {
  for (int iter = 0; iter < 200; ++iter) {
    int p = 0, q = 1;
    double biggest = std::abs(a[0][1]);
    if (std::abs(a[0][2]) > biggest) { biggest = std::abs(a[0][2]); p = 0; q = 2; }
    if (std::abs(a[1][2]) > biggest) { biggest = std::abs(a[1][2]); p = 1; q = 2; }
    if (biggest < 1e-300) break;

    double app = a[p][p], aqq = a[q][q], apq = a[p][q];
    double phi = 0.5 * std::atan2(2.0 * apq, aqq - app);
    double c = std::cos(phi), s = std::sin(phi);

    std::array<std::array<double, 3>, 3> r{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    r[p][p] = c; r[q][q] = c; r[p][q] = s; r[q][p] = -s;

    // a = r^T a r
    std::array<std::array<double, 3>, 3> tmp{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double acc = 0;
        for (int k = 0; k < 3; ++k) acc += r[k][i] * a[k][j];
        tmp[i][j] = acc;
      }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double acc = 0;
        for (int k = 0; k < 3; ++k) acc += tmp[i][k] * r[k][j];
        a[i][j] = acc;
      }
  }
  std::array<double, 3> ev{a[0][0], a[1][1], a[2][2]};
  std::sort(ev.begin(), ev.end(), std::greater<double>());
  return ev;
}

// curvature straight from the definition over an explicit neighbor list
inline double curvature_oracle(const std::vector<pcqa::Vec3>& neighborhood) {
  if (neighborhood.size() < 3) return 0.0;
  pcqa::Vec3 mean{0, 0, 0};
  for (const auto& p : neighborhood) mean += p;
  mean = mean / static_cast<double>(neighborhood.size());
  std::array<std::array<double, 3>, 3> c{};
  for (const auto& p : neighborhood) {
    pcqa::Vec3 d = p - mean;
    double v[3] = {d.x, d.y, d.z};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) c[i][j] += v[i] * v[j];
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c[i][j] /= static_cast<double>(neighborhood.size());
  auto ev = jacobi_eigenvalues(c);
  double total = ev[0] + ev[1] + ev[2];
  if (total < 1e-12) return 0.0;
  return ev[2] / total;
}

// --- geometry ---------------------------------------------------------------

inline std::vector<size_t> brute_force_radius(const std::vector<pcqa::Vec3>& points,
                                              const pcqa::Vec3& query, double radius) {
  std::vector<size_t> out;
  double r2 = radius * radius;
  for (size_t i = 0; i < points.size(); ++i)
    if (pcqa::squared_distance(points[i], query) <= r2) out.push_back(i);
  return out;
}

// untruncated Gaussian position smoothing
inline pcqa::Vec3 full_kernel_smooth(const std::vector<pcqa::Vec3>& points, size_t index,
                                     double sigma) {
  pcqa::Vec3 acc{0, 0, 0};
  double wsum = 0.0;
  for (const auto& p : points) {
    double w = std::exp(-pcqa::squared_distance(points[index], p) / (2.0 * sigma * sigma));
    acc += p * w;
    wsum += w;
  }
  return acc / wsum;
}

// --- sRGB -> CIELAB, transcribed from the CIE definitions ------------------

inline std::array<double, 3> lab_oracle(int r8, int g8, int b8) {
  auto lin = [](double c) {
    c /= 255.0;
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
  };
  double r = lin(r8), g = lin(g8), b = lin(b8);
  double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  auto f = [](double t) {
    double d = 6.0 / 29.0;
    return t > d * d * d ? std::cbrt(t) : t / (3.0 * d * d) + 4.0 / 29.0;
  };
  double fx = f(x / 0.95047), fy = f(y / 1.0), fz = f(z / 1.08883);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

// --- correlations, pair counting and definitional ranks ---------------------

inline double kendall_pair_count(const std::vector<double>& x, const std::vector<double>& y) {
  size_t n = x.size();
  double concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      double a = x[i] - x[j], b = y[i] - y[j];
      if (a == 0 && b == 0) continue;
      if (a == 0) { ties_x += 1; continue; }
      if (b == 0) { ties_y += 1; continue; }
      if ((a > 0) == (b > 0)) concordant += 1;
      else discordant += 1;
    }
  double n0 = static_cast<double>(n) * (n - 1) / 2.0;
  // n1/n2 from group counts (joint ties belong to both)
  auto tie_pairs = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    double pairs = 0;
    size_t i = 0;
    while (i < v.size()) {
      size_t j = i;
      while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
      double t = static_cast<double>(j - i + 1);
      pairs += t * (t - 1) / 2.0;
      i = j + 1;
    }
    return pairs;
  };
  double n1 = tie_pairs(x), n2 = tie_pairs(y);
  double denom = std::sqrt((n0 - n1) * (n0 - n2));
  return (concordant - discordant) / denom;
}

inline double spearman_definitional(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
      double less = 0, equal = 0;
      for (size_t j = 0; j < v.size(); ++j) {
        if (v[j] < v[i]) less += 1;
        if (v[j] == v[i]) equal += 1;
      }
      r[i] = less + (equal + 1.0) / 2.0;  // average rank of the tie group
    }
    return r;
  };
  std::vector<double> rx = ranks(x), ry = ranks(y);
  double mx = 0, my = 0;
  for (size_t i = 0; i < rx.size(); ++i) { mx += rx[i]; my += ry[i]; }
  mx /= static_cast<double>(rx.size());
  my /= static_cast<double>(ry.size());
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// --- Adam, transcribed update rule ------------------------------------------

struct AdamOracle {
  double m = 0, v = 0;
  long t = 0;
  double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  explicit AdamOracle(double lr_) : lr(lr_) {}

  double step(double w, double g) {
    t += 1;
    m = beta1 * m + (1 - beta1) * g;
    v = beta2 * v + (1 - beta2) * g * g;
    double mh = m / (1 - std::pow(beta1, t));
    double vh = v / (1 - std::pow(beta2, t));
    return w - lr * mh / (std::sqrt(vh) + eps);
  }
};

}  // namespace oracles

#endif  // PCQA_TESTS_ORACLES_HPP
