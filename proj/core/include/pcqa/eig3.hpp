#ifndef PCQA_EIG3_HPP
#define PCQA_EIG3_HPP

#include <array>

#include "pcqa/geometry.hpp"

namespace pcqa {

// Symmetric 3x3 matrix stored as unique entries.
struct Sym3 {
  double xx = 0.0, xy = 0.0, xz = 0.0, yy = 0.0, yz = 0.0, zz = 0.0;

  Vec3 mul(const Vec3& v) const {
    return {xx * v.x + xy * v.y + xz * v.z,
            xy * v.x + yy * v.y + yz * v.z,
            xz * v.x + yz * v.y + zz * v.z};
  }
  double trace() const { return xx + yy + zz; }
};

// lambda1 >= lambda2 >= lambda3, clamped to be nonnegative when the matrix is
// a covariance (tiny negative round-off is snapped to 0).
struct EigenTriple {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
};

// Eigenvalues by the closed-form characteristic-polynomial route, switching
// to cyclic Jacobi sweeps when the discriminant degenerates.
EigenTriple sym3_eigenvalues(const Sym3& m);

// Unit eigenvector for the smallest eigenvalue (surface-normal direction for
// a neighborhood covariance). Falls back to Jacobi when the closed form is
// ill-conditioned; returns (0,0,1) for the zero matrix.
Vec3 sym3_smallest_eigenvector(const Sym3& m, const EigenTriple& eigenvalues);

}  // namespace pcqa

#endif  // PCQA_EIG3_HPP
