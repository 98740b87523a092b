#ifndef PCQA_TENSOR_HPP
#define PCQA_TENSOR_HPP

#include <cstddef>
#include <vector>

#include "pcqa/error.hpp"
#include "pcqa/rng.hpp"

namespace pcqa {

// Dense row-major matrix of 64-bit reals. The whole model runs in doubles so
// finite-difference checks have headroom.
struct Tensor2 {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor2() = default;
  Tensor2(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
  size_t size() const { return data.size(); }
  bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }

  static Tensor2 ones(int r, int c) { return Tensor2(r, c, 1.0); }
  static Tensor2 identity(int n) {
    Tensor2 t(n, n);
    for (int i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
  }
  static Tensor2 full(int r, int c, double v) { return Tensor2(r, c, v); }

  // Xavier/Glorot uniform draw, deterministic under the supplied generator.
  static Tensor2 glorot(int r, int c, Rng& rng) {
    Tensor2 t(r, c);
    double limit = std::sqrt(6.0 / (r + c));
    for (double& v : t.data) v = (2.0 * rng.next_double() - 1.0) * limit;
    return t;
  }

  static Tensor2 random_normal(int r, int c, Rng& rng, double stddev = 1.0) {
    Tensor2 t(r, c);
    for (double& v : t.data) v = rng.next_normal() * stddev;
    return t;
  }
};

// C = op_a(A) * op_b(B) with optional transposes; shapes checked.
Tensor2 matmul(const Tensor2& a, const Tensor2& b, bool trans_a = false, bool trans_b = false);

// C += op_a(A) * op_b(B), the accumulation form backward passes use.
void matmul_accum(Tensor2& out, const Tensor2& a, const Tensor2& b, bool trans_a, bool trans_b);

}  // namespace pcqa

#endif  // PCQA_TENSOR_HPP
