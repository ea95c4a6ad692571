#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "csem/chartcore.hpp"
#include "csem/encoder.hpp"

namespace csem::train {

struct TrainConfig {
  std::set<InsightLevel> levels = {InsightLevel::visual, InsightLevel::statistics,
                                   InsightLevel::task};
  int batch_size = 64;
  int epochs = 20;
  double learning_rate = 1e-2;
  double momentum = 0.9;
  double tau = 0.07;
  uint64_t seed = 0;
  enc::PreprocessMode preprocess;
  int embed_dim = 128;
  enc::FeatureConfig features;
  std::string checkpoint_dir;  // empty: no per-epoch checkpoints

  void validate() const;
};

struct TrainPair {
  std::string chart_id;
  std::string text;
  InsightLevel level = InsightLevel::visual;
};

struct BuildPairsResult {
  std::vector<TrainPair> pairs;
  int skipped_charts = 0;  // charts missing a requested level
};

BuildPairsResult build_pairs(const std::vector<ChartSpec>& charts,
                             const std::vector<Insight>& insights,
                             const std::set<InsightLevel>& levels);

// Symmetric InfoNCE over row-aligned positive pairs. Inputs are the
// pre-normalization projected vectors (B x d, row-major); normalization
// happens inside and the returned gradients chain through it.
struct InfoNceResult {
  double loss = 0.0;
  std::vector<double> grad_text;   // B x d
  std::vector<double> grad_chart;  // B x d
};

InfoNceResult info_nce(const std::vector<double>& text_vecs,
                       const std::vector<double>& chart_vecs, int batch, int dim,
                       double tau);

struct TrainLog {
  std::vector<double> epoch_mean_loss;
};

struct TrainResult {
  enc::DualEncoderModel model;
  TrainLog log;
};

// chart_id -> chart tower input; reusable across training runs
using ChartInputMap = std::map<std::string, enc::SparseVec>;

ChartInputMap compute_chart_inputs(const std::vector<ChartSpec>& charts,
                                   enc::PreprocessMode mode,
                                   const enc::FeatureConfig& fc);

TrainResult train(const std::vector<ChartSpec>& charts,
                  const std::vector<Insight>& insights, const TrainConfig& cfg);

TrainResult train_on_inputs(const std::vector<TrainPair>& pairs,
                            const ChartInputMap& chart_inputs, const TrainConfig& cfg);

struct GradCheckBatch {
  std::vector<enc::SparseVec> text_inputs;
  std::vector<enc::SparseVec> chart_inputs;
};

// central finite differences on sampled weight coordinates; returns the
// max relative error with a guarded denominator
double grad_check(const enc::DualEncoderModel& model, const GradCheckBatch& batch,
                  double eps, uint64_t coord_seed = 42, int n_coords = 50);

// checkpoint: magic "CSDE", u32 f_text, u32 f_chart, u32 d, f32 tau,
// then row-major little-endian f32 weights (text tower, then chart tower)
void save_checkpoint(const enc::DualEncoderModel& model, const std::string& path);
enc::DualEncoderModel load_checkpoint(const std::string& path);

void save_trainlog(const TrainLog& log, const std::string& path);

}  // namespace csem::train
