#ifndef PCQA_ADAM_HPP
#define PCQA_ADAM_HPP

#include <cstdint>
#include <vector>

#include "pcqa/tensor.hpp"

namespace pcqa {

// Adam with bias correction. Moment tensors mirror the parameter list they
// were created for; step() must always be called with the same ordering.
struct OptimizerState {
  std::vector<Tensor2> m;
  std::vector<Tensor2> v;
  int64_t t = 0;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static OptimizerState create(const std::vector<Tensor2*>& params, double lr);
};

// One update over all parameter tensors; t is incremented once per call.
void adam_step(const std::vector<Tensor2*>& params, const std::vector<Tensor2>& grads,
               OptimizerState& state);

}  // namespace pcqa

#endif  // PCQA_ADAM_HPP
