#include "pcqa/eig3.hpp"

#include <algorithm>
#include <cmath>

namespace pcqa {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Cyclic Jacobi on a 3x3 symmetric matrix; returns eigenvalues unsorted in
// d[], eigenvectors in the columns of v[][] when v != nullptr.
void jacobi3(const Sym3& m, double d[3], double v[3][3]) {
  double a[3][3] = {{m.xx, m.xy, m.xz}, {m.xy, m.yy, m.yz}, {m.xz, m.yz, m.zz}};
  double q[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if (off < 1e-300) break;
    for (int p = 0; p < 2; ++p) {
      for (int r = p + 1; r < 3; ++r) {
        if (a[p][r] == 0.0) continue;
        double theta = (a[r][r] - a[p][p]) / (2.0 * a[p][r]);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < 3; ++k) {
          double akp = a[k][p], akr = a[k][r];
          a[k][p] = c * akp - s * akr;
          a[k][r] = s * akp + c * akr;
        }
        for (int k = 0; k < 3; ++k) {
          double apk = a[p][k], ark = a[r][k];
          a[p][k] = c * apk - s * ark;
          a[r][k] = s * apk + c * ark;
        }
        for (int k = 0; k < 3; ++k) {
          double qkp = q[k][p], qkr = q[k][r];
          q[k][p] = c * qkp - s * qkr;
          q[k][r] = s * qkp + c * qkr;
        }
      }
    }
  }
  for (int i = 0; i < 3; ++i) d[i] = a[i][i];
  if (v) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) v[i][j] = q[i][j];
  }
}

}  // namespace

EigenTriple sym3_eigenvalues(const Sym3& m) {
  double e1, e2, e3;
  double p1 = m.xy * m.xy + m.xz * m.xz + m.yz * m.yz;
  double scale = std::max({std::abs(m.xx), std::abs(m.yy), std::abs(m.zz),
                           std::abs(m.xy), std::abs(m.xz), std::abs(m.yz)});
  if (p1 <= 1e-30 * scale * scale) {
    // already diagonal
    e1 = m.xx;
    e2 = m.yy;
    e3 = m.zz;
  } else {
    double q = m.trace() / 3.0;
    double p2 = (m.xx - q) * (m.xx - q) + (m.yy - q) * (m.yy - q) + (m.zz - q) * (m.zz - q) +
                2.0 * p1;
    double p = std::sqrt(p2 / 6.0);
    // B = (A - q I) / p
    double bxx = (m.xx - q) / p, byy = (m.yy - q) / p, bzz = (m.zz - q) / p;
    double bxy = m.xy / p, bxz = m.xz / p, byz = m.yz / p;
    double detb = bxx * (byy * bzz - byz * byz) - bxy * (bxy * bzz - byz * bxz) +
                  bxz * (bxy * byz - byy * bxz);
    double r = detb / 2.0;
    if (r < -1.0 + 1e-12 || r > 1.0 - 1e-12) {
      // near-degenerate discriminant: hand off to Jacobi
      double d[3];
      jacobi3(m, d, nullptr);
      e1 = d[0];
      e2 = d[1];
      e3 = d[2];
    } else {
      double phi = std::acos(r) / 3.0;
      e1 = q + 2.0 * p * std::cos(phi);
      e3 = q + 2.0 * p * std::cos(phi + 2.0 * kPi / 3.0);
      e2 = 3.0 * q - e1 - e3;
    }
  }
  if (e1 < e2) std::swap(e1, e2);
  if (e1 < e3) std::swap(e1, e3);
  if (e2 < e3) std::swap(e2, e3);
  // covariance round-off: snap tiny negatives to zero
  auto clamp0 = [](double v) { return v > -1e-12 && v < 0.0 ? 0.0 : v; };
  return {clamp0(e1), clamp0(e2), clamp0(e3)};
}

Vec3 sym3_smallest_eigenvector(const Sym3& m, const EigenTriple& ev) {
  double scale = std::max({std::abs(m.xx), std::abs(m.yy), std::abs(m.zz),
                           std::abs(m.xy), std::abs(m.xz), std::abs(m.yz)});
  if (scale <= 0.0) return {0.0, 0.0, 1.0};

  // rows of (A - lambda3 I); the eigenvector is orthogonal to two independent
  // rows, so take the largest cross product of row pairs
  Vec3 r0{m.xx - ev.lambda3, m.xy, m.xz};
  Vec3 r1{m.xy, m.yy - ev.lambda3, m.yz};
  Vec3 r2{m.xz, m.yz, m.zz - ev.lambda3};
  Vec3 c01 = r0.cross(r1);
  Vec3 c02 = r0.cross(r2);
  Vec3 c12 = r1.cross(r2);
  double n01 = c01.squared_norm(), n02 = c02.squared_norm(), n12 = c12.squared_norm();
  Vec3 best = c01;
  double best_n = n01;
  if (n02 > best_n) { best = c02; best_n = n02; }
  if (n12 > best_n) { best = c12; best_n = n12; }

  double rel = best_n / (scale * scale * scale * scale);
  if (rel > 1e-24) return best.normalized();

  // degenerate (repeated eigenvalue or zero matrix): Jacobi gives a basis
  double d[3], v[3][3];
  jacobi3(m, d, v);
  int smallest = 0;
  if (d[1] < d[smallest]) smallest = 1;
  if (d[2] < d[smallest]) smallest = 2;
  Vec3 vec{v[0][smallest], v[1][smallest], v[2][smallest]};
  double n = vec.norm();
  if (n < 1e-300) return {0.0, 0.0, 1.0};
  return vec / n;
}

}  // namespace pcqa
