#ifndef PCQA_MODEL_HPP
#define PCQA_MODEL_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pcqa/attention.hpp"
#include "pcqa/pcw_graph.hpp"
#include "pcqa/tape.hpp"

namespace pcqa {

enum class RunMode { Train, Infer };

struct GafConfig {
  int branch_layers = 2;  // stacked attention layers per feature branch
  int heads = 4;
  int d_k = 16;
  int d_out = 64;       // fusion projection output width
  double dropout = 0.2;

  int d_model() const { return heads * d_k; }  // branch layer output width
};

// Regressor shape. Three layers with per-head output width `hidden`; layers
// 1-2 concatenate their heads, layer 3 averages them. tanh between layers,
// linear scalar head after mean pooling.
struct GatConfig {
  int hidden = 64;
  std::array<int, 3> heads = {8, 6, 4};
  double feat_dropout = 0.3;
  double attn_dropout = 0.3;
  double leaky_slope = 0.2;
};

struct ModelConfig {
  int input_dim = static_cast<int>(kNodeFeatureDim);
  GafConfig gaf;
  GatConfig gat;
};

struct GatLayerParams {
  std::vector<Tensor2> w;      // per head, d_in x hidden
  std::vector<Tensor2> a_src;  // per head, hidden x 1
  std::vector<Tensor2> a_dst;  // per head, hidden x 1
};

struct ModelParams {
  ModelConfig config;
  std::array<std::vector<AttentionParams>, 3> branches;  // [branch][layer]
  Tensor2 proj_w;  // (3 * d_model) x d_out
  Tensor2 proj_b;  // 1 x d_out
  std::array<GatLayerParams, 3> gat;
  Tensor2 head_w;  // hidden x 1
  Tensor2 head_b;  // 1 x 1

  static ModelParams init(const ModelConfig& config, uint64_t seed);

  // Visits every tensor in a fixed order; the same order backs Adam moments,
  // gradients, and the checkpoint layout.
  void for_each_tensor(const std::function<void(const std::string&, Tensor2&)>& fn);
  std::vector<Tensor2*> tensor_ptrs();
  std::vector<std::string> tensor_names();
  size_t parameter_count();
};

// Dense view of a PcwGraph as model inputs.
struct ModelGraph {
  int k = 0;
  Tensor2 node_features;              // k x d
  std::array<Tensor2, 3> adjacency;   // X1..X3
  std::vector<uint8_t> mask;          // k x k support with self-loops
};

ModelGraph to_model_graph(const PcwGraph& graph);

// --- tape builders -------------------------------------------------------

struct ModelLeaves {
  std::vector<Tape::NodeId> ids;  // aligned with tensor_ptrs() order
};

ModelLeaves register_params(Tape& tape, ModelParams& params);

// GAF: three independent branch stacks over (F, X^i), concat, linear
// projection, ReLU, dropout (train only).
Tape::NodeId build_gaf_forward(Tape& tape, const ModelGraph& graph, ModelParams& params,
                               const ModelLeaves& leaves, RunMode mode, Rng* dropout_rng);

// One GAT layer over an explicit support mask (self-loops required). Returns
// the post-tanh output; alpha_ids, when non-null, receives the per-head
// attention matrices (post-softmax, pre-dropout).
Tape::NodeId build_gat_layer(Tape& tape, Tape::NodeId input, const std::vector<uint8_t>& mask,
                             int k, const std::vector<Tape::NodeId>& w_ids,
                             const std::vector<Tape::NodeId>& a_src_ids,
                             const std::vector<Tape::NodeId>& a_dst_ids, bool average_heads,
                             const GatConfig& config, RunMode mode, Rng* dropout_rng,
                             std::vector<Tape::NodeId>* alpha_ids = nullptr);

// Full regressor: three GAT layers, mean pooling, scalar head.
Tape::NodeId build_gat_forward(Tape& tape, Tape::NodeId z, const std::vector<uint8_t>& mask,
                               int k, ModelParams& params, const ModelLeaves& leaves,
                               RunMode mode, Rng* dropout_rng);

Tape::NodeId build_model_forward(Tape& tape, const ModelGraph& graph, ModelParams& params,
                                 const ModelLeaves& leaves, RunMode mode, Rng* dropout_rng);

// --- eager entry points ---------------------------------------------------

Tensor2 gaf_forward(const ModelGraph& graph, ModelParams& params, RunMode mode,
                    uint64_t rng_seed);

struct GatLayerEval {
  Tensor2 output;
  std::vector<Tensor2> attention;  // per head
};
GatLayerEval gat_layer(const Tensor2& input, const std::vector<uint8_t>& mask,
                       const GatLayerParams& layer, bool average_heads, const GatConfig& config,
                       RunMode mode, uint64_t rng_seed);

double gat_forward(const Tensor2& z, const std::vector<uint8_t>& mask, ModelParams& params,
                   RunMode mode, uint64_t rng_seed);

// Normalized score in the unit target range.
double model_score(const ModelGraph& graph, ModelParams& params, RunMode mode,
                   uint64_t rng_seed);

// Score plus d(score)/d(theta) for every parameter tensor, scaled by
// `upstream`. Gradient tensors align with tensor_ptrs().
double model_score_and_grads(const ModelGraph& graph, ModelParams& params, RunMode mode,
                             uint64_t rng_seed, double upstream, std::vector<Tensor2>& grads);

// Bernoulli keep-mask with inverted scaling; entries are 0 or 1/(1-rate).
Tensor2 dropout_mask(int rows, int cols, double rate, Rng& rng);

}  // namespace pcqa

#endif  // PCQA_MODEL_HPP
