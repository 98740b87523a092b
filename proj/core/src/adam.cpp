#include "pcqa/adam.hpp"

#include <cmath>

#include "pcqa/error.hpp"

namespace pcqa {

OptimizerState OptimizerState::create(const std::vector<Tensor2*>& params, double lr) {
  OptimizerState state;
  state.lr = lr;
  state.m.reserve(params.size());
  state.v.reserve(params.size());
  for (const Tensor2* p : params) {
    state.m.emplace_back(p->rows, p->cols);
    state.v.emplace_back(p->rows, p->cols);
  }
  return state;
}

void adam_step(const std::vector<Tensor2*>& params, const std::vector<Tensor2>& grads,
               OptimizerState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw Error(ErrorCode::ShapeMismatch, "adam_step tensor counts disagree");
  state.t += 1;
  double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (size_t p = 0; p < params.size(); ++p) {
    Tensor2& w = *params[p];
    const Tensor2& g = grads[p];
    if (!w.same_shape(g) || !w.same_shape(state.m[p]))
      throw Error(ErrorCode::ShapeMismatch, "adam_step shape mismatch at tensor " +
                                                std::to_string(p));
    double* m = state.m[p].data.data();
    double* v = state.v[p].data.data();
    double* wd = w.data.data();
    const double* gd = g.data.data();
    for (size_t i = 0; i < w.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * gd[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * gd[i] * gd[i];
      double m_hat = m[i] / bc1;
      double v_hat = v[i] / bc2;
      wd[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

}  // namespace pcqa
