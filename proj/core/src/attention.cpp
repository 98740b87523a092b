#include "pcqa/attention.hpp"

#include <cmath>

namespace pcqa {

void AttentionParams::validate() const {
  if (w_q.empty() || w_q.size() != w_k.size() || w_q.size() != w_v.size())
    throw Error(ErrorCode::ShapeMismatch, "attention head count mismatch");
  int d = w_q[0].rows, dk = w_q[0].cols;
  for (size_t h = 0; h < w_q.size(); ++h) {
    if (w_q[h].rows != d || w_q[h].cols != dk || !w_k[h].same_shape(w_q[h]) ||
        !w_v[h].same_shape(w_q[h]))
      throw Error(ErrorCode::ShapeMismatch, "attention projection shapes disagree");
  }
  if (w_o.rows != static_cast<int>(w_q.size()) * dk)
    throw Error(ErrorCode::ShapeMismatch, "output projection rows != n_heads * d_k");
}

AttentionParams AttentionParams::init(int d_in, int n_heads, int d_k, int d_model, Rng& rng) {
  AttentionParams p;
  p.w_q.reserve(n_heads);
  p.w_k.reserve(n_heads);
  p.w_v.reserve(n_heads);
  for (int h = 0; h < n_heads; ++h) {
    p.w_q.push_back(Tensor2::glorot(d_in, d_k, rng));
    p.w_k.push_back(Tensor2::glorot(d_in, d_k, rng));
    p.w_v.push_back(Tensor2::glorot(d_in, d_k, rng));
  }
  p.w_o = Tensor2::glorot(n_heads * d_k, d_model, rng);
  return p;
}

Tape::NodeId build_graph_attention(Tape& tape, Tape::NodeId q, Tape::NodeId k, Tape::NodeId v,
                                   Tape::NodeId a, int d_k) {
  Tape::NodeId scores = tape.matmul(q, k, false, true);
  Tape::NodeId biased = tape.add(scores, a);
  const Tensor2& s = tape.value(biased);
  Tape::NodeId scale =
      tape.leaf(Tensor2::full(s.rows, s.cols, 1.0 / std::sqrt(static_cast<double>(d_k))), false);
  Tape::NodeId scaled = tape.mul(biased, scale);
  Tape::NodeId probs = tape.softmax(scaled);
  return tape.matmul(probs, v);
}

Tensor2 graph_attention(const Tensor2& q, const Tensor2& k, const Tensor2& v, const Tensor2& a) {
  if (q.cols != k.cols || q.rows != a.rows || k.rows != a.cols || v.rows != k.rows)
    throw Error(ErrorCode::ShapeMismatch, "graph_attention operand shapes");
  Tape tape;
  Tape::NodeId qn = tape.leaf(&q, false);
  Tape::NodeId kn = tape.leaf(&k, false);
  Tape::NodeId vn = tape.leaf(&v, false);
  Tape::NodeId an = tape.leaf(&a, false);
  return tape.value(build_graph_attention(tape, qn, kn, vn, an, k.cols));
}

Tape::NodeId build_multi_head_attention(Tape& tape, Tape::NodeId x, Tape::NodeId a,
                                        const std::vector<Tape::NodeId>& wq,
                                        const std::vector<Tape::NodeId>& wk,
                                        const std::vector<Tape::NodeId>& wv, Tape::NodeId wo,
                                        int d_k) {
  std::vector<Tape::NodeId> heads;
  heads.reserve(wq.size());
  for (size_t h = 0; h < wq.size(); ++h) {
    Tape::NodeId qh = tape.matmul(x, wq[h]);
    Tape::NodeId kh = tape.matmul(x, wk[h]);
    Tape::NodeId vh = tape.matmul(x, wv[h]);
    heads.push_back(build_graph_attention(tape, qh, kh, vh, a, d_k));
  }
  Tape::NodeId cat = heads.size() == 1 ? heads[0] : tape.concat_cols(heads);
  return tape.matmul(cat, wo);
}

Tensor2 multi_head_attention(const Tensor2& x, const Tensor2& a, const AttentionParams& params) {
  params.validate();
  if (x.cols != params.w_q[0].rows)
    throw Error(ErrorCode::ShapeMismatch, "multi_head_attention input dim");
  Tape tape;
  Tape::NodeId xn = tape.leaf(&x, false);
  Tape::NodeId an = tape.leaf(&a, false);
  std::vector<Tape::NodeId> wq, wk, wv;
  for (int h = 0; h < params.n_heads(); ++h) {
    wq.push_back(tape.leaf(&params.w_q[static_cast<size_t>(h)], false));
    wk.push_back(tape.leaf(&params.w_k[static_cast<size_t>(h)], false));
    wv.push_back(tape.leaf(&params.w_v[static_cast<size_t>(h)], false));
  }
  Tape::NodeId wo = tape.leaf(&params.w_o, false);
  return tape.value(build_multi_head_attention(tape, xn, an, wq, wk, wv, wo, params.d_k()));
}

}  // namespace pcqa
