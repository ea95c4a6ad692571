#pragma once

#include <optional>
#include <string>
#include <vector>

#include "csem/chartcore.hpp"
#include "csem/chartsynth.hpp"

namespace csem::enc {

struct FeatureConfig {
  int text_buckets = 4096;
  int grid_side = 32;
  int chart_dim() const { return grid_side * grid_side + text_buckets; }
};

// sparse feature vector, entries sorted by index
struct SparseVec {
  std::vector<std::pair<uint32_t, double>> entries;

  double norm() const;
  void l2_normalize();  // zero vector stays zero
};

// Hashed text features: word 1-2-grams plus character 3-grams, lowercased,
// punctuation stripped, term-frequency weighted.
SparseVec text_features(const std::string& text, int buckets);

struct ChartFeatures {
  std::vector<double> grid;  // grid_side^2 mean-pooled occupancy
  SparseVec ocr;             // text features over surviving anchors
};

enum class PreprocessKind { direct_resize, center_crop };

struct PreprocessMode {
  PreprocessKind kind = PreprocessKind::direct_resize;
  int target_side = 512;
};

std::string to_string(PreprocessKind k);
PreprocessKind preprocess_kind_from(const std::string& s);

synth::PixelGrid preprocess(const synth::PixelGrid& grid, PreprocessMode mode);

// anchor set after preprocessing, computed from layout geometry alone
std::vector<synth::TextAnchor> preprocessed_anchors(const ChartSpec& spec, PreprocessMode mode);

ChartFeatures extract_chart_features(const ChartSpec& spec, PreprocessMode mode,
                                     const FeatureConfig& fc = {});

// chart tower input: [grid | ocr] concatenated and L2-normalized as a whole
SparseVec chart_input(const ChartFeatures& f, const FeatureConfig& fc);

struct DualEncoderModel {
  int f_text = 4096;
  int f_chart = 0;
  int d = 128;
  double temperature = 0.07;
  uint64_t init_seed = 0;
  std::vector<double> w_text;   // f_text x d, row-major
  std::vector<double> w_chart;  // f_chart x d, row-major

  FeatureConfig feature_config() const;
  static DualEncoderModel random_init(int f_text, int f_chart, int d, double tau,
                                      uint64_t seed);
};

// projected, unnormalized tower output
std::vector<double> project(const std::vector<double>& weights, int d, const SparseVec& x);

EmbeddingVector embed_text(const DualEncoderModel& model, const std::string& text);
EmbeddingVector embed_chart(const DualEncoderModel& model, const ChartSpec& spec,
                            PreprocessMode mode);

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// identity-projection embedding of the raw chart features; fixed encoder
// used for similarity grouping
EmbeddingVector feature_embedding(const ChartSpec& spec, PreprocessMode mode,
                                  const FeatureConfig& fc = {});

struct EndpointConfig {
  std::string url;         // full endpoint URL
  std::string model;       // generative service model name
  double timeout_sec = 5.0;
  int max_retries = 3;
  int max_in_flight = 4;
};

struct EmbedInput {
  std::string text;
  std::optional<std::string> svg;  // chart payload when set
};

// POST {inputs:[...]} -> {vectors:[[...],...]}; re-normalized locally,
// order preserved; mixed dimensions in a batch are an error.
std::vector<EmbeddingVector> remote_embed(const std::vector<EmbedInput>& inputs,
                                          const EndpointConfig& cfg);

}  // namespace csem::enc
