#include "pcqa/tape.hpp"

#include <cmath>
#include <string>

namespace pcqa {

Tape::Node& Tape::at(NodeId id) {
  if (id < 0 || static_cast<size_t>(id) >= nodes_.size())
    throw Error(ErrorCode::UnrecordedForward, "node " + std::to_string(id) + " not on tape");
  return nodes_[static_cast<size_t>(id)];
}

const Tape::Node& Tape::at(NodeId id) const {
  if (id < 0 || static_cast<size_t>(id) >= nodes_.size())
    throw Error(ErrorCode::UnrecordedForward, "node " + std::to_string(id) + " not on tape");
  return nodes_[static_cast<size_t>(id)];
}

Tape::NodeId Tape::push(Node&& node) {
  nodes_.push_back(std::move(node));
  return static_cast<NodeId>(nodes_.size() - 1);
}

Tape::NodeId Tape::leaf(const Tensor2* external, bool requires_grad) {
  Node n;
  n.op = Op::Leaf;
  n.external = external;
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

Tape::NodeId Tape::leaf(Tensor2 value, bool requires_grad) {
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b, bool trans_a, bool trans_b) {
  const Tensor2& av = node_value(at(a));
  const Tensor2& bv = node_value(at(b));
  Node n;
  n.op = Op::MatMul;
  n.a = a;
  n.b = b;
  n.trans_a = trans_a;
  n.trans_b = trans_b;
  n.requires_grad = at(a).requires_grad || at(b).requires_grad;
  n.value = pcqa::matmul(av, bv, trans_a, trans_b);
  return push(std::move(n));
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor2& av = node_value(at(a));
  const Tensor2& bv = node_value(at(b));
  if (!av.same_shape(bv)) throw Error(ErrorCode::ShapeMismatch, "add operands differ in shape");
  Node n;
  n.op = Op::Add;
  n.a = a;
  n.b = b;
  n.requires_grad = at(a).requires_grad || at(b).requires_grad;
  n.value = av;
  for (size_t i = 0; i < n.value.size(); ++i) n.value.data[i] += bv.data[i];
  return push(std::move(n));
}

Tape::NodeId Tape::mul(NodeId a, NodeId b) {
  const Tensor2& av = node_value(at(a));
  const Tensor2& bv = node_value(at(b));
  if (!av.same_shape(bv)) throw Error(ErrorCode::ShapeMismatch, "mul operands differ in shape");
  Node n;
  n.op = Op::Mul;
  n.a = a;
  n.b = b;
  n.requires_grad = at(a).requires_grad || at(b).requires_grad;
  n.value = av;
  for (size_t i = 0; i < n.value.size(); ++i) n.value.data[i] *= bv.data[i];
  return push(std::move(n));
}

Tape::NodeId Tape::softmax(NodeId a, std::vector<uint8_t> mask) {
  const Tensor2& av = node_value(at(a));
  if (!mask.empty() && mask.size() != av.size())
    throw Error(ErrorCode::ShapeMismatch, "softmax mask size");
  Node n;
  n.op = Op::Softmax;
  n.a = a;
  n.mask = std::move(mask);
  n.requires_grad = at(a).requires_grad;
  n.value = Tensor2(av.rows, av.cols);
  for (int i = 0; i < av.rows; ++i) {
    const uint8_t* mrow =
        n.mask.empty() ? nullptr : n.mask.data() + static_cast<size_t>(i) * av.cols;
    double maxv = -1e308;
    bool any = false;
    for (int j = 0; j < av.cols; ++j) {
      if (mrow && !mrow[j]) continue;
      maxv = std::max(maxv, av.at(i, j));
      any = true;
    }
    if (!any)
      throw Error(ErrorCode::ShapeMismatch,
                  "softmax row " + std::to_string(i) + " fully masked");
    double sum = 0.0;
    for (int j = 0; j < av.cols; ++j) {
      if (mrow && !mrow[j]) continue;
      double e = std::exp(av.at(i, j) - maxv);
      n.value.at(i, j) = e;
      sum += e;
    }
    double inv = 1.0 / sum;
    for (int j = 0; j < av.cols; ++j) {
      if (mrow && !mrow[j]) continue;
      n.value.at(i, j) *= inv;
    }
  }
  return push(std::move(n));
}

Tape::NodeId Tape::tanh(NodeId a) {
  const Tensor2& av = node_value(at(a));
  Node n;
  n.op = Op::Tanh;
  n.a = a;
  n.requires_grad = at(a).requires_grad;
  n.value = av;
  for (double& v : n.value.data) v = std::tanh(v);
  return push(std::move(n));
}

Tape::NodeId Tape::relu(NodeId a) {
  const Tensor2& av = node_value(at(a));
  Node n;
  n.op = Op::Relu;
  n.a = a;
  n.requires_grad = at(a).requires_grad;
  n.value = av;
  for (double& v : n.value.data) v = v > 0.0 ? v : 0.0;
  return push(std::move(n));
}

Tape::NodeId Tape::leaky_relu(NodeId a, double slope) {
  const Tensor2& av = node_value(at(a));
  Node n;
  n.op = Op::LeakyRelu;
  n.a = a;
  n.slope = slope;
  n.requires_grad = at(a).requires_grad;
  n.value = av;
  for (double& v : n.value.data) v = v > 0.0 ? v : slope * v;
  return push(std::move(n));
}

Tape::NodeId Tape::concat_cols(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw Error(ErrorCode::ShapeMismatch, "concat of nothing");
  int rows = node_value(at(parts[0])).rows;
  int cols = 0;
  bool rg = false;
  for (NodeId id : parts) {
    const Tensor2& v = node_value(at(id));
    if (v.rows != rows) throw Error(ErrorCode::ShapeMismatch, "concat row counts differ");
    cols += v.cols;
    rg = rg || at(id).requires_grad;
  }
  Node n;
  n.op = Op::Concat;
  n.inputs = parts;
  n.requires_grad = rg;
  n.value = Tensor2(rows, cols);
  int offset = 0;
  for (NodeId id : parts) {
    const Tensor2& v = node_value(at(id));
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < v.cols; ++j) n.value.at(i, offset + j) = v.at(i, j);
    offset += v.cols;
  }
  return push(std::move(n));
}

Tape::NodeId Tape::slice_cols(NodeId a, int col_begin, int col_end) {
  const Tensor2& av = node_value(at(a));
  if (col_begin < 0 || col_end > av.cols || col_begin >= col_end)
    throw Error(ErrorCode::ShapeMismatch, "slice bounds");
  Node n;
  n.op = Op::Slice;
  n.a = a;
  n.col_begin = col_begin;
  n.col_end = col_end;
  n.requires_grad = at(a).requires_grad;
  n.value = Tensor2(av.rows, col_end - col_begin);
  for (int i = 0; i < av.rows; ++i)
    for (int j = col_begin; j < col_end; ++j) n.value.at(i, j - col_begin) = av.at(i, j);
  return push(std::move(n));
}

Tape::NodeId Tape::row_mean(NodeId a) {
  const Tensor2& av = node_value(at(a));
  Node n;
  n.op = Op::RowMean;
  n.a = a;
  n.requires_grad = at(a).requires_grad;
  n.value = Tensor2(1, av.cols);
  double inv = 1.0 / av.rows;
  for (int i = 0; i < av.rows; ++i)
    for (int j = 0; j < av.cols; ++j) n.value.at(0, j) += av.at(i, j) * inv;
  return push(std::move(n));
}

const Tensor2& Tape::value(NodeId id) const { return node_value(at(id)); }

const Tensor2& Tape::grad(NodeId id) const {
  static const Tensor2 kEmpty;
  const Node& n = at(id);
  return n.grad.size() ? n.grad : kEmpty;
}

void Tape::ensure_grad(Node& n) {
  if (n.grad.size() == 0) {
    const Tensor2& v = node_value(n);
    n.grad = Tensor2(v.rows, v.cols);
  }
}

void Tape::backward(NodeId output, const Tensor2& seed) {
  Node& out = at(output);
  if (!node_value(out).same_shape(seed))
    throw Error(ErrorCode::ShapeMismatch, "backward seed shape");
  for (Node& n : nodes_) n.grad = Tensor2();
  ensure_grad(out);
  out.grad = seed;

  for (NodeId id = output; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    const Tensor2& g = n.grad;
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::MatMul: {
        Node& na = at(n.a);
        Node& nb = at(n.b);
        const Tensor2& av = node_value(na);
        const Tensor2& bv = node_value(nb);
        if (na.requires_grad) {
          ensure_grad(na);
          if (!n.trans_a && !n.trans_b) matmul_accum(na.grad, g, bv, false, true);
          else if (!n.trans_a && n.trans_b) matmul_accum(na.grad, g, bv, false, false);
          else if (n.trans_a && !n.trans_b) matmul_accum(na.grad, bv, g, false, true);
          else matmul_accum(na.grad, bv, g, true, true);
        }
        if (nb.requires_grad) {
          ensure_grad(nb);
          if (!n.trans_a && !n.trans_b) matmul_accum(nb.grad, av, g, true, false);
          else if (!n.trans_a && n.trans_b) matmul_accum(nb.grad, g, av, true, false);
          else if (n.trans_a && !n.trans_b) matmul_accum(nb.grad, av, g, false, false);
          else matmul_accum(nb.grad, g, av, true, true);
        }
        break;
      }
      case Op::Add: {
        for (NodeId src : {n.a, n.b}) {
          Node& ns = at(src);
          if (!ns.requires_grad) continue;
          ensure_grad(ns);
          for (size_t i = 0; i < g.size(); ++i) ns.grad.data[i] += g.data[i];
        }
        break;
      }
      case Op::Mul: {
        Node& na = at(n.a);
        Node& nb = at(n.b);
        if (na.requires_grad) {
          ensure_grad(na);
          const Tensor2& bv = node_value(nb);
          for (size_t i = 0; i < g.size(); ++i) na.grad.data[i] += g.data[i] * bv.data[i];
        }
        if (nb.requires_grad) {
          ensure_grad(nb);
          const Tensor2& av = node_value(na);
          for (size_t i = 0; i < g.size(); ++i) nb.grad.data[i] += g.data[i] * av.data[i];
        }
        break;
      }
      case Op::Softmax: {
        Node& na = at(n.a);
        if (!na.requires_grad) break;
        ensure_grad(na);
        const Tensor2& y = n.value;
        for (int i = 0; i < y.rows; ++i) {
          double dot = 0.0;
          for (int j = 0; j < y.cols; ++j) dot += g.at(i, j) * y.at(i, j);
          for (int j = 0; j < y.cols; ++j)
            na.grad.at(i, j) += y.at(i, j) * (g.at(i, j) - dot);
        }
        break;
      }
      case Op::Tanh: {
        Node& na = at(n.a);
        if (!na.requires_grad) break;
        ensure_grad(na);
        const Tensor2& y = n.value;
        for (size_t i = 0; i < g.size(); ++i)
          na.grad.data[i] += g.data[i] * (1.0 - y.data[i] * y.data[i]);
        break;
      }
      case Op::Relu: {
        Node& na = at(n.a);
        if (!na.requires_grad) break;
        ensure_grad(na);
        const Tensor2& x = node_value(na);
        for (size_t i = 0; i < g.size(); ++i)
          if (x.data[i] > 0.0) na.grad.data[i] += g.data[i];
        break;
      }
      case Op::LeakyRelu: {
        Node& na = at(n.a);
        if (!na.requires_grad) break;
        ensure_grad(na);
        const Tensor2& x = node_value(na);
        for (size_t i = 0; i < g.size(); ++i)
          na.grad.data[i] += g.data[i] * (x.data[i] > 0.0 ? 1.0 : n.slope);
        break;
      }
      case Op::Concat: {
        int offset = 0;
        for (NodeId src : n.inputs) {
          Node& ns = at(src);
          const Tensor2& sv = node_value(ns);
          if (ns.requires_grad) {
            ensure_grad(ns);
            for (int i = 0; i < sv.rows; ++i)
              for (int j = 0; j < sv.cols; ++j) ns.grad.at(i, j) += g.at(i, offset + j);
          }
          offset += sv.cols;
        }
        break;
      }
      case Op::Slice: {
        Node& na = at(n.a);
        if (!na.requires_grad) break;
        ensure_grad(na);
        for (int i = 0; i < g.rows; ++i)
          for (int j = 0; j < g.cols; ++j) na.grad.at(i, n.col_begin + j) += g.at(i, j);
        break;
      }
      case Op::RowMean: {
        Node& na = at(n.a);
        if (!na.requires_grad) break;
        ensure_grad(na);
        const Tensor2& x = node_value(na);
        double inv = 1.0 / x.rows;
        for (int i = 0; i < x.rows; ++i)
          for (int j = 0; j < x.cols; ++j) na.grad.at(i, j) += g.at(0, j) * inv;
        break;
      }
    }
  }
}

}  // namespace pcqa
