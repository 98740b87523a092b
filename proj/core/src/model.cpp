#include "pcqa/model.hpp"

#include <cmath>

namespace pcqa {

ModelParams ModelParams::init(const ModelConfig& config, uint64_t seed) {
  ModelParams params;
  params.config = config;
  Rng rng(derive_seed(seed, "model-init"));

  const GafConfig& gaf = config.gaf;
  for (int b = 0; b < 3; ++b) {
    auto& layers = params.branches[static_cast<size_t>(b)];
    layers.reserve(static_cast<size_t>(gaf.branch_layers));
    int d_in = config.input_dim;
    for (int l = 0; l < gaf.branch_layers; ++l) {
      layers.push_back(AttentionParams::init(d_in, gaf.heads, gaf.d_k, gaf.d_model(), rng));
      d_in = gaf.d_model();
    }
  }
  params.proj_w = Tensor2::glorot(3 * gaf.d_model(), gaf.d_out, rng);
  params.proj_b = Tensor2(1, gaf.d_out);

  const GatConfig& gat = config.gat;
  int d_in = gaf.d_out;
  for (int l = 0; l < 3; ++l) {
    GatLayerParams& layer = params.gat[static_cast<size_t>(l)];
    int heads = gat.heads[static_cast<size_t>(l)];
    for (int h = 0; h < heads; ++h) {
      layer.w.push_back(Tensor2::glorot(d_in, gat.hidden, rng));
      layer.a_src.push_back(Tensor2::glorot(gat.hidden, 1, rng));
      layer.a_dst.push_back(Tensor2::glorot(gat.hidden, 1, rng));
    }
    d_in = l < 2 ? heads * gat.hidden : gat.hidden;
  }
  params.head_w = Tensor2::glorot(gat.hidden, 1, rng);
  params.head_b = Tensor2(1, 1);
  return params;
}

void ModelParams::for_each_tensor(const std::function<void(const std::string&, Tensor2&)>& fn) {
  for (int b = 0; b < 3; ++b) {
    auto& layers = branches[static_cast<size_t>(b)];
    for (size_t l = 0; l < layers.size(); ++l) {
      std::string prefix = "gaf.b" + std::to_string(b) + ".l" + std::to_string(l);
      AttentionParams& attn = layers[l];
      for (size_t h = 0; h < attn.w_q.size(); ++h) {
        std::string hp = prefix + ".h" + std::to_string(h);
        fn(hp + ".wq", attn.w_q[h]);
        fn(hp + ".wk", attn.w_k[h]);
        fn(hp + ".wv", attn.w_v[h]);
      }
      fn(prefix + ".wo", attn.w_o);
    }
  }
  fn("gaf.proj.w", proj_w);
  fn("gaf.proj.b", proj_b);
  for (int l = 0; l < 3; ++l) {
    GatLayerParams& layer = gat[static_cast<size_t>(l)];
    for (size_t h = 0; h < layer.w.size(); ++h) {
      std::string hp = "gat.l" + std::to_string(l) + ".h" + std::to_string(h);
      fn(hp + ".w", layer.w[h]);
      fn(hp + ".a_src", layer.a_src[h]);
      fn(hp + ".a_dst", layer.a_dst[h]);
    }
  }
  fn("head.w", head_w);
  fn("head.b", head_b);
}

std::vector<Tensor2*> ModelParams::tensor_ptrs() {
  std::vector<Tensor2*> out;
  for_each_tensor([&](const std::string&, Tensor2& t) { out.push_back(&t); });
  return out;
}

std::vector<std::string> ModelParams::tensor_names() {
  std::vector<std::string> out;
  for_each_tensor([&](const std::string& name, Tensor2&) { out.push_back(name); });
  return out;
}

size_t ModelParams::parameter_count() {
  size_t n = 0;
  for_each_tensor([&](const std::string&, Tensor2& t) { n += t.size(); });
  return n;
}

ModelGraph to_model_graph(const PcwGraph& graph) {
  ModelGraph mg;
  mg.k = graph.k;
  mg.node_features.rows = graph.k;
  mg.node_features.cols = static_cast<int>(graph.node_features.dim);
  mg.node_features.data = graph.node_features.values;
  for (int c = 0; c < 3; ++c) {
    mg.adjacency[static_cast<size_t>(c)].rows = graph.k;
    mg.adjacency[static_cast<size_t>(c)].cols = graph.k;
    mg.adjacency[static_cast<size_t>(c)].data = graph.adjacency(c);
  }
  mg.mask = graph_support_mask(graph);
  return mg;
}

ModelLeaves register_params(Tape& tape, ModelParams& params) {
  ModelLeaves leaves;
  params.for_each_tensor([&](const std::string&, Tensor2& t) {
    leaves.ids.push_back(tape.leaf(&t, true));
  });
  return leaves;
}

Tensor2 dropout_mask(int rows, int cols, double rate, Rng& rng) {
  Tensor2 mask(rows, cols);
  double keep = 1.0 - rate;
  double inv_keep = 1.0 / keep;
  for (double& v : mask.data) v = rng.next_double() < keep ? inv_keep : 0.0;
  return mask;
}

namespace {

// Leaf index bookkeeping: tensors are registered in for_each_tensor order, so
// the builders walk the same order to find their leaves.
struct LeafCursor {
  const ModelLeaves* leaves;
  size_t next = 0;
  Tape::NodeId take() { return leaves->ids[next++]; }
};

Tape::NodeId apply_dropout(Tape& tape, Tape::NodeId x, double rate, RunMode mode,
                           Rng* dropout_rng) {
  if (mode != RunMode::Train || rate <= 0.0 || !dropout_rng) return x;
  const Tensor2& v = tape.value(x);
  return tape.mul(x, tape.leaf(dropout_mask(v.rows, v.cols, rate, *dropout_rng), false));
}

}  // namespace

Tape::NodeId build_gaf_forward(Tape& tape, const ModelGraph& graph, ModelParams& params,
                               const ModelLeaves& leaves, RunMode mode, Rng* dropout_rng) {
  const GafConfig& gaf = params.config.gaf;
  LeafCursor cursor{&leaves, 0};

  Tape::NodeId features = tape.leaf(&graph.node_features, false);
  std::vector<Tape::NodeId> branch_outputs;
  branch_outputs.reserve(3);
  for (int b = 0; b < 3; ++b) {
    Tape::NodeId adjacency = tape.leaf(&graph.adjacency[static_cast<size_t>(b)], false);
    Tape::NodeId h = features;
    for (int l = 0; l < gaf.branch_layers; ++l) {
      std::vector<Tape::NodeId> wq, wk, wv;
      for (int head = 0; head < gaf.heads; ++head) {
        wq.push_back(cursor.take());
        wk.push_back(cursor.take());
        wv.push_back(cursor.take());
      }
      Tape::NodeId wo = cursor.take();
      h = build_multi_head_attention(tape, h, adjacency, wq, wk, wv, wo, gaf.d_k);
    }
    branch_outputs.push_back(h);
  }

  Tape::NodeId fused = tape.concat_cols(branch_outputs);
  Tape::NodeId proj_w = cursor.take();
  Tape::NodeId proj_b = cursor.take();
  Tape::NodeId projected = tape.matmul(fused, proj_w);
  // broadcast the bias row over the k nodes
  Tape::NodeId ones = tape.leaf(Tensor2::ones(graph.k, 1), false);
  Tape::NodeId bias = tape.matmul(ones, proj_b);
  Tape::NodeId biased = tape.add(projected, bias);
  Tape::NodeId activated = tape.relu(biased);
  return apply_dropout(tape, activated, gaf.dropout, mode, dropout_rng);
}

Tape::NodeId build_gat_layer(Tape& tape, Tape::NodeId input, const std::vector<uint8_t>& mask,
                             int k, const std::vector<Tape::NodeId>& w_ids,
                             const std::vector<Tape::NodeId>& a_src_ids,
                             const std::vector<Tape::NodeId>& a_dst_ids, bool average_heads,
                             const GatConfig& config, RunMode mode, Rng* dropout_rng,
                             std::vector<Tape::NodeId>* alpha_ids) {
  Tape::NodeId h = apply_dropout(tape, input, config.feat_dropout, mode, dropout_rng);
  Tape::NodeId ones_col = tape.leaf(Tensor2::ones(k, 1), false);

  std::vector<Tape::NodeId> heads;
  heads.reserve(w_ids.size());
  for (size_t head = 0; head < w_ids.size(); ++head) {
    Tape::NodeId wh = tape.matmul(h, w_ids[head]);
    Tape::NodeId s = tape.matmul(wh, a_src_ids[head]);  // k x 1
    Tape::NodeId t = tape.matmul(wh, a_dst_ids[head]);  // k x 1
    // e_ij = s_i + t_j over the supported pairs
    Tape::NodeId s_block = tape.matmul(s, ones_col, false, true);
    Tape::NodeId t_block = tape.matmul(ones_col, t, false, true);
    Tape::NodeId e = tape.leaky_relu(tape.add(s_block, t_block), config.leaky_slope);
    Tape::NodeId alpha = tape.softmax(e, mask);
    if (alpha_ids) alpha_ids->push_back(alpha);
    Tape::NodeId alpha_used = apply_dropout(tape, alpha, config.attn_dropout, mode, dropout_rng);
    heads.push_back(tape.matmul(alpha_used, wh));
  }

  Tape::NodeId combined;
  if (!average_heads) {
    combined = heads.size() == 1 ? heads[0] : tape.concat_cols(heads);
  } else {
    combined = heads[0];
    for (size_t i = 1; i < heads.size(); ++i) combined = tape.add(combined, heads[i]);
    const Tensor2& cv = tape.value(combined);
    combined = tape.mul(combined, tape.leaf(Tensor2::full(cv.rows, cv.cols,
                                                          1.0 / static_cast<double>(heads.size())),
                                            false));
  }
  return tape.tanh(combined);
}

Tape::NodeId build_gat_forward(Tape& tape, Tape::NodeId z, const std::vector<uint8_t>& mask,
                               int k, ModelParams& params, const ModelLeaves& leaves,
                               RunMode mode, Rng* dropout_rng) {
  // skip past the GAF leaves
  LeafCursor cursor{&leaves, 0};
  size_t gaf_tensors = 0;
  for (int b = 0; b < 3; ++b)
    gaf_tensors += params.branches[static_cast<size_t>(b)].size() *
                   (3 * static_cast<size_t>(params.config.gaf.heads) + 1);
  cursor.next = gaf_tensors + 2;  // + proj_w, proj_b

  Tape::NodeId h = z;
  for (int l = 0; l < 3; ++l) {
    const GatLayerParams& layer = params.gat[static_cast<size_t>(l)];
    std::vector<Tape::NodeId> w_ids, a_src_ids, a_dst_ids;
    for (size_t head = 0; head < layer.w.size(); ++head) {
      w_ids.push_back(cursor.take());
      a_src_ids.push_back(cursor.take());
      a_dst_ids.push_back(cursor.take());
    }
    h = build_gat_layer(tape, h, mask, k, w_ids, a_src_ids, a_dst_ids, /*average_heads=*/l == 2,
                        params.config.gat, mode, dropout_rng);
  }

  Tape::NodeId pooled = tape.row_mean(h);
  Tape::NodeId head_w = cursor.take();
  Tape::NodeId head_b = cursor.take();
  return tape.add(tape.matmul(pooled, head_w), head_b);
}

Tape::NodeId build_model_forward(Tape& tape, const ModelGraph& graph, ModelParams& params,
                                 const ModelLeaves& leaves, RunMode mode, Rng* dropout_rng) {
  Tape::NodeId z = build_gaf_forward(tape, graph, params, leaves, mode, dropout_rng);
  return build_gat_forward(tape, z, graph.mask, graph.k, params, leaves, mode, dropout_rng);
}

Tensor2 gaf_forward(const ModelGraph& graph, ModelParams& params, RunMode mode,
                    uint64_t rng_seed) {
  Tape tape;
  ModelLeaves leaves = register_params(tape, params);
  Rng rng(derive_seed(rng_seed, "dropout"));
  return tape.value(build_gaf_forward(tape, graph, params, leaves, mode, &rng));
}

GatLayerEval gat_layer(const Tensor2& input, const std::vector<uint8_t>& mask,
                       const GatLayerParams& layer, bool average_heads, const GatConfig& config,
                       RunMode mode, uint64_t rng_seed) {
  Tape tape;
  Tape::NodeId in = tape.leaf(&input, false);
  std::vector<Tape::NodeId> w_ids, a_src_ids, a_dst_ids;
  for (size_t h = 0; h < layer.w.size(); ++h) {
    w_ids.push_back(tape.leaf(&layer.w[h], false));
    a_src_ids.push_back(tape.leaf(&layer.a_src[h], false));
    a_dst_ids.push_back(tape.leaf(&layer.a_dst[h], false));
  }
  Rng rng(derive_seed(rng_seed, "dropout"));
  std::vector<Tape::NodeId> alpha_ids;
  Tape::NodeId out = build_gat_layer(tape, in, mask, input.rows, w_ids, a_src_ids, a_dst_ids,
                                     average_heads, config, mode, &rng, &alpha_ids);
  GatLayerEval eval;
  eval.output = tape.value(out);
  for (Tape::NodeId id : alpha_ids) eval.attention.push_back(tape.value(id));
  return eval;
}

double gat_forward(const Tensor2& z, const std::vector<uint8_t>& mask, ModelParams& params,
                   RunMode mode, uint64_t rng_seed) {
  Tape tape;
  ModelLeaves leaves = register_params(tape, params);
  Rng rng(derive_seed(rng_seed, "dropout"));
  Tape::NodeId score =
      build_gat_forward(tape, tape.leaf(&z, false), mask, z.rows, params, leaves, mode, &rng);
  return tape.value(score).at(0, 0);
}

double model_score(const ModelGraph& graph, ModelParams& params, RunMode mode,
                   uint64_t rng_seed) {
  Tape tape;
  ModelLeaves leaves = register_params(tape, params);
  Rng rng(derive_seed(rng_seed, "dropout"));
  Tape::NodeId score = build_model_forward(tape, graph, params, leaves, mode, &rng);
  return tape.value(score).at(0, 0);
}

double model_score_and_grads(const ModelGraph& graph, ModelParams& params, RunMode mode,
                             uint64_t rng_seed, double upstream, std::vector<Tensor2>& grads) {
  Tape tape;
  ModelLeaves leaves = register_params(tape, params);
  Rng rng(derive_seed(rng_seed, "dropout"));
  Tape::NodeId score = build_model_forward(tape, graph, params, leaves, mode, &rng);

  Tensor2 seed(1, 1);
  seed.at(0, 0) = upstream;
  tape.backward(score, seed);

  std::vector<Tensor2*> ptrs = params.tensor_ptrs();
  grads.clear();
  grads.reserve(ptrs.size());
  for (size_t i = 0; i < ptrs.size(); ++i) {
    const Tensor2& g = tape.grad(leaves.ids[i]);
    grads.push_back(g.size() ? g : Tensor2(ptrs[i]->rows, ptrs[i]->cols));
  }
  return tape.value(score).at(0, 0);
}

}  // namespace pcqa
