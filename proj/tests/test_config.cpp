#include <doctest.h>

#include "pcqa/config.hpp"

using namespace pcqa;

TEST_CASE("config defaults carry the documented values") {
  PipelineConfig config;
  CHECK(config.feature.neighbor_radius_frac == 0.02);
  CHECK(config.feature.knn_fallback == 16);
  CHECK(config.graph.k == 32);
  CHECK(config.graph.max_iter == 100);
  CHECK(config.graph.cluster_radius_frac == 0.35);
  CHECK(config.gaf.branch_layers == 2);
  CHECK(config.gaf.heads == 4);
  CHECK(config.gaf.d_k == 16);
  CHECK(config.gaf.d_out == 64);
  CHECK(config.gaf.dropout == 0.2);
  CHECK(config.gat_feat_dropout == 0.3);
  CHECK(config.gat_attn_dropout == 0.3);
  CHECK(config.training.lr == 1e-4);
  CHECK(config.training.batch_size == 32);
  CHECK(config.training.epochs == 100);

  ModelConfig mc = config.model();
  CHECK(mc.gat.hidden == 64);
  CHECK(mc.gat.heads == std::array<int, 3>{8, 6, 4});
  CHECK(mc.gat.leaky_slope == 0.2);
}

TEST_CASE("config file parsing with overrides") {
  std::string toml =
      "# pipeline settings\n"
      "[feature]\n"
      "neighbor_radius_frac = 0.05\n"
      "\n"
      "[clustering]\n"
      "k = 12\n"
      "cluster_space = \"features-only\"\n"
      "\n"
      "[training]\n"
      "lr = 0.001\n"
      "seed = 42\n";
  PipelineConfig config = parse_pipeline_config(toml);
  CHECK(config.feature.neighbor_radius_frac == 0.05);
  CHECK(config.graph.k == 12);
  CHECK(config.graph.cluster_features_only);
  CHECK(config.training.lr == 0.001);
  CHECK(config.training.seed == 42);
  // untouched keys keep defaults
  CHECK(config.graph.cluster_radius_frac == 0.35);
}

TEST_CASE("unknown keys and sections are rejected") {
  CHECK_THROWS_AS(parse_pipeline_config("[feature]\nneighbour_radius_frac = 0.05\n"), Error);
  CHECK_THROWS_AS(parse_pipeline_config("[nonsense]\nk = 3\n"), Error);
  CHECK_THROWS_AS(parse_pipeline_config("[clustering]\nk = banana\n"), Error);
  CHECK_THROWS_AS(parse_pipeline_config("k = 3\n"), Error);  // key before any section
  CHECK_THROWS_AS(parse_pipeline_config("[clustering]\nk\n"), Error);
}

TEST_CASE("invalid values fail validation") {
  CHECK_THROWS_AS(parse_pipeline_config("[clustering]\nk = 1\n"), Error);
  CHECK_THROWS_AS(parse_pipeline_config("[feature]\nneighbor_radius_frac = 2.0\n"), Error);
  CHECK_THROWS_AS(parse_pipeline_config("[training]\nlr = -1.0\n"), Error);
  CHECK_THROWS_AS(parse_pipeline_config("[model]\ngaf_dropout = 1.0\n"), Error);
}

TEST_CASE("config echo round trips exactly") {
  PipelineConfig config;
  config.feature.neighbor_radius_frac = 0.037;
  config.graph.k = 19;
  config.graph.similarity_only = true;
  config.training.lr = 2.5e-4;
  config.training.seed = 777;
  config.gaf.d_out = 48;

  PipelineConfig back = parse_pipeline_config(config.to_toml());
  CHECK(back.to_toml() == config.to_toml());
  CHECK(back.pipeline_fingerprint() == config.pipeline_fingerprint());
  CHECK(back.model_fingerprint() == config.model_fingerprint());
}

TEST_CASE("fingerprint tracks pipeline-relevant keys only") {
  PipelineConfig a;
  PipelineConfig b;
  b.training.lr = 0.9;  // training settings do not reshape graphs
  CHECK(a.pipeline_fingerprint() == b.pipeline_fingerprint());
  b.graph.k = 8;
  CHECK(a.pipeline_fingerprint() != b.pipeline_fingerprint());
}
