#ifndef PCQA_ATTENTION_HPP
#define PCQA_ATTENTION_HPP

#include <vector>

#include "pcqa/tape.hpp"

namespace pcqa {

// Learnable projections for one multi-head attention layer: per-head query /
// key / value maps (d x d_k each) and the output projection
// ((n_heads * d_k) x d_model).
struct AttentionParams {
  std::vector<Tensor2> w_q, w_k, w_v;
  Tensor2 w_o;

  int n_heads() const { return static_cast<int>(w_q.size()); }
  int d_k() const { return w_q.empty() ? 0 : w_q[0].cols; }
  void validate() const;

  static AttentionParams init(int d_in, int n_heads, int d_k, int d_model, Rng& rng);
};

// softmax((Q K^T + A) / sqrt(d_k)) V with a dense row softmax; A is divided
// by sqrt(d_k) along with the scores, exactly as the update rule is written.
Tensor2 graph_attention(const Tensor2& q, const Tensor2& k, const Tensor2& v, const Tensor2& a);

// Concat(head_1..head_n) W^O with head_i = graph_attention(X Wq_i, X Wk_i,
// X Wv_i, A).
Tensor2 multi_head_attention(const Tensor2& x, const Tensor2& a, const AttentionParams& params);

// Tape builders used by the trainable model; `a` and `x` are existing nodes.
Tape::NodeId build_graph_attention(Tape& tape, Tape::NodeId q, Tape::NodeId k, Tape::NodeId v,
                                   Tape::NodeId a, int d_k);
Tape::NodeId build_multi_head_attention(Tape& tape, Tape::NodeId x, Tape::NodeId a,
                                        const std::vector<Tape::NodeId>& wq,
                                        const std::vector<Tape::NodeId>& wk,
                                        const std::vector<Tape::NodeId>& wv, Tape::NodeId wo,
                                        int d_k);

}  // namespace pcqa

#endif  // PCQA_ATTENTION_HPP
