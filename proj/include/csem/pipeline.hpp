#pragma once

#include <string>
#include <vector>

#include "csem/benchgen.hpp"
#include "csem/chartcore.hpp"
#include "csem/chartsynth.hpp"
#include "csem/encoder.hpp"
#include "csem/evalharness.hpp"
#include "csem/trainer.hpp"

namespace csem::pipe {

// Flat key = value configuration with env-var overrides for endpoints.
struct PipelineConfig {
  std::string out_dir = "out";
  uint64_t seed = 7;
  int tables = 200;
  int max_charts_per_table = 3;
  int style_variants = 5;
  double variant_jitter = 0.03;
  int target_charts = 0;
  int jobs = 0;  // 0: library default

  bench::GroupingConfig grouping;
  bench::VoteSimParams votes;
  train::TrainConfig train;
  eval::MetricConfig metrics;
  enc::EndpointConfig llm;    // CSEM_LLM_URL / CSEM_LLM_MODEL
  enc::EndpointConfig embed;  // CSEM_EMBED_URL
  int remote_embed_dim = 0;   // CSEM_EMBED_DIM

  void validate() const;
};

PipelineConfig load_config(const std::string& path);   // missing path -> defaults
PipelineConfig parse_config_text(const std::string& text);
void apply_env_overrides(PipelineConfig& cfg);
void apply_seed(PipelineConfig& cfg, uint64_t seed);   // re-derives stage seeds

// canonical file locations under out_dir
std::string charts_path(const PipelineConfig&);
std::string insights_path(const PipelineConfig&);
std::string model_path(const PipelineConfig&);
std::string trainlog_path(const PipelineConfig&);
std::string embeddings_path(const PipelineConfig&);
std::string groups_path(const PipelineConfig&);
std::string queries_path(const PipelineConfig&);
std::string votes_path(const PipelineConfig&);
std::string reports_dir(const PipelineConfig&);

// pipeline stages; each reads/writes only the documented corpus files
void stage_synth(const PipelineConfig& cfg);
void stage_insights(const PipelineConfig& cfg);
void stage_train(const PipelineConfig& cfg);
void stage_embed(const PipelineConfig& cfg);
void stage_index(const PipelineConfig& cfg);
void stage_bench_build(const PipelineConfig& cfg);
void stage_queries(const PipelineConfig& cfg);
void stage_eval(const PipelineConfig& cfg);
void stage_ablation(const PipelineConfig& cfg);
void stage_ocr_eval(const PipelineConfig& cfg);
void stage_preprocess_compare(const PipelineConfig& cfg);
void stage_all(const PipelineConfig& cfg);

// inputs a stage needs before it can run (for --dry-run and error messages)
std::vector<std::string> missing_inputs(const std::string& stage, const PipelineConfig& cfg);

}  // namespace csem::pipe
