#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "csem/chartcore.hpp"
#include "csem/encoder.hpp"
#include "csem/retrieval.hpp"
#include "csem/trainer.hpp"

namespace csem::eval {

struct MetricConfig {
  std::vector<int> k_list = {1, 5, 10};
  int k_rank = 10;  // cut-off for MRR/NDCG and the Overall R@k

  void validate() const;
};

std::optional<int> rank_of_target(const RankedList& ranked, const std::string& target_id);

// binary single-relevant formulation; ideal DCG is 1
double recall_at_k(std::optional<int> rank, int k);
double mrr_contrib(std::optional<int> rank, int k);
double ndcg_contrib(std::optional<int> rank, int k);

// Overall = arithmetic mean of {R@k, MRR@k, NDCG@k} x {precise, fuzzy}
double overall_of_six(const std::array<double, 6>& six);

// aggregate a set of per-query ranks into one report
EvalReport report_from_ranks(
    const std::vector<std::pair<std::string, std::optional<int>>>& ranks,
    const MetricConfig& cfg, const std::string& tag);

struct EvalRun {
  EvalReport precise;
  EvalReport fuzzy;
  EvalReport combined;  // pooled ranks; overall from the six kind metrics
};

EvalRun evaluate(const retr::VectorIndex& index, const std::vector<TextQuery>& queries,
                 const enc::DualEncoderModel& model, const MetricConfig& cfg,
                 const std::string& tag = "");

// chart index from cached tower inputs (cheap to redo per model)
retr::VectorIndex index_from_inputs(const train::ChartInputMap& inputs,
                                    const enc::DualEncoderModel& model);

struct AblationRow {
  std::set<InsightLevel> levels;  // empty = untrained baseline
  bool untrained = false;
  EvalRun run;
};

struct AblationTable {
  std::vector<AblationRow> rows;  // baseline, singles, pairs, full triple
};

struct AblationConfig {
  train::TrainConfig base;
  MetricConfig metrics;
};

AblationTable run_ablation(const std::vector<ChartSpec>& charts,
                           const std::vector<Insight>& insights,
                           const std::vector<TextQuery>& queries,
                           const AblationConfig& cfg);

// Text-to-OCR baseline: charts are represented by the text their rendering
// carries, both sides embedded with the text tower.
EvalRun ocr_baseline(const std::vector<ChartSpec>& charts,
                     const std::vector<TextQuery>& queries,
                     const enc::DualEncoderModel& model, const MetricConfig& cfg);

struct PreprocessComparison {
  EvalRun resize;
  EvalRun crop;
  // metric -> (resize value, crop value, delta)
  std::vector<std::array<std::string, 4>> delta_rows;
};

PreprocessComparison compare_preprocess(const std::vector<ChartSpec>& charts,
                                        const std::vector<Insight>& insights,
                                        const std::vector<TextQuery>& queries,
                                        const train::TrainConfig& base,
                                        const MetricConfig& metrics);

// metric tables, values x100 with two decimals
std::string render_run_markdown(const EvalRun& run, const MetricConfig& cfg);
std::string render_run_csv(const EvalRun& run, const MetricConfig& cfg);
std::string render_ablation_markdown(const AblationTable& table, const MetricConfig& cfg);
std::string render_ablation_csv(const AblationTable& table, const MetricConfig& cfg);

}  // namespace csem::eval
