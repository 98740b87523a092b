#include "pcqa/tensor.hpp"

#include <string>

namespace pcqa {

namespace {

void check_inner(int a_cols, int b_rows, const char* what) {
  if (a_cols != b_rows)
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": inner dimensions " +
                                              std::to_string(a_cols) + " vs " +
                                              std::to_string(b_rows));
}

}  // namespace

void matmul_accum(Tensor2& out, const Tensor2& a, const Tensor2& b, bool trans_a, bool trans_b) {
  int m = trans_a ? a.cols : a.rows;
  int kk = trans_a ? a.rows : a.cols;
  int kb = trans_b ? b.cols : b.rows;
  int n = trans_b ? b.rows : b.cols;
  check_inner(kk, kb, "matmul");
  if (out.rows != m || out.cols != n)
    throw Error(ErrorCode::ShapeMismatch, "matmul output shape");

  const double* A = a.data.data();
  const double* B = b.data.data();
  double* C = out.data.data();

  if (!trans_a && !trans_b) {
    // C[i,j] += sum_k A[i,k] B[k,j]; k-inner layout keeps B rows contiguous
    for (int i = 0; i < m; ++i) {
      double* c_row = C + static_cast<size_t>(i) * n;
      const double* a_row = A + static_cast<size_t>(i) * kk;
      for (int k = 0; k < kk; ++k) {
        double av = a_row[k];
        if (av == 0.0) continue;
        const double* b_row = B + static_cast<size_t>(k) * n;
        for (int j = 0; j < n; ++j) c_row[j] += av * b_row[j];
      }
    }
  } else if (!trans_a && trans_b) {
    // C[i,j] += dot(A row i, B row j)
    for (int i = 0; i < m; ++i) {
      const double* a_row = A + static_cast<size_t>(i) * kk;
      double* c_row = C + static_cast<size_t>(i) * n;
      for (int j = 0; j < n; ++j) {
        const double* b_row = B + static_cast<size_t>(j) * kk;
        double acc = 0.0;
        for (int k = 0; k < kk; ++k) acc += a_row[k] * b_row[k];
        c_row[j] += acc;
      }
    }
  } else if (trans_a && !trans_b) {
    // C[i,j] += sum_k A[k,i] B[k,j]; rank-1 updates over k
    for (int k = 0; k < kk; ++k) {
      const double* a_row = A + static_cast<size_t>(k) * m;
      const double* b_row = B + static_cast<size_t>(k) * n;
      for (int i = 0; i < m; ++i) {
        double av = a_row[i];
        if (av == 0.0) continue;
        double* c_row = C + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) c_row[j] += av * b_row[j];
      }
    }
  } else {
    // C[i,j] += sum_k A[k,i] B[j,k]
    for (int i = 0; i < m; ++i) {
      double* c_row = C + static_cast<size_t>(i) * n;
      for (int j = 0; j < n; ++j) {
        const double* b_row = B + static_cast<size_t>(j) * kk;
        double acc = 0.0;
        for (int k = 0; k < kk; ++k) acc += A[static_cast<size_t>(k) * m + i] * b_row[k];
        c_row[j] += acc;
      }
    }
  }
}

Tensor2 matmul(const Tensor2& a, const Tensor2& b, bool trans_a, bool trans_b) {
  int m = trans_a ? a.cols : a.rows;
  int n = trans_b ? b.rows : b.cols;
  Tensor2 out(m, n);
  matmul_accum(out, a, b, trans_a, trans_b);
  return out;
}

}  // namespace pcqa
