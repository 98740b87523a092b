#ifndef PCQA_TAPE_HPP
#define PCQA_TAPE_HPP

#include <cstdint>
#include <vector>

#include "pcqa/tensor.hpp"

namespace pcqa {

// Reverse-mode autodiff over a recorded tape of ten primitives: matmul, add,
// elementwise mul (dropout masks and constant scaling), row softmax (with an
// optional support mask), tanh, relu, leaky relu, column concat, column
// slice, and row mean. Everything the fusion and regression networks need
// decomposes into these, which keeps every gradient finite-difference
// checkable.
//
// A tape is built fresh per forward pass. Leaves either own their value or
// alias an external tensor that must outlive the tape (parameters, graph
// inputs).
class Tape {
 public:
  using NodeId = int;

  NodeId leaf(const Tensor2* external, bool requires_grad);
  NodeId leaf(Tensor2 value, bool requires_grad);

  NodeId matmul(NodeId a, NodeId b, bool trans_a = false, bool trans_b = false);
  NodeId add(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  // Row-wise softmax with max subtraction. mask, when non-empty, is a
  // row-major 0/1 support; masked-out entries get probability exactly 0 and
  // every row must keep at least one entry.
  NodeId softmax(NodeId a, std::vector<uint8_t> mask = {});
  NodeId tanh(NodeId a);
  NodeId relu(NodeId a);
  NodeId leaky_relu(NodeId a, double slope);
  NodeId concat_cols(const std::vector<NodeId>& parts);
  NodeId slice_cols(NodeId a, int col_begin, int col_end);
  NodeId row_mean(NodeId a);

  const Tensor2& value(NodeId id) const;
  // Gradient of the last backward() target with respect to node id; zero
  // tensor if the node did not participate.
  const Tensor2& grad(NodeId id) const;

  // Seeds d(output)/d(output) with `seed` (shape must match) and runs the
  // reverse sweep. Gradients accumulate on every requires_grad-reachable
  // node.
  void backward(NodeId output, const Tensor2& seed);

  size_t node_count() const { return nodes_.size(); }

 private:
  enum class Op { Leaf, MatMul, Add, Mul, Softmax, Tanh, Relu, LeakyRelu, Concat, Slice, RowMean };

  struct Node {
    Op op = Op::Leaf;
    NodeId a = -1, b = -1;
    std::vector<NodeId> inputs;  // concat
    bool trans_a = false, trans_b = false;
    double slope = 0.0;
    int col_begin = 0, col_end = 0;
    std::vector<uint8_t> mask;
    Tensor2 value;
    const Tensor2* external = nullptr;
    Tensor2 grad;
    bool requires_grad = false;
  };

  const Tensor2& node_value(const Node& n) const { return n.external ? *n.external : n.value; }
  Node& at(NodeId id);
  const Node& at(NodeId id) const;
  NodeId push(Node&& node);
  void ensure_grad(Node& n);

  std::vector<Node> nodes_;
};

}  // namespace pcqa

#endif  // PCQA_TAPE_HPP
