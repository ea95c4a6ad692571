#include "csem/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

#include "csem/http_client.hpp"

namespace csem::enc {

double SparseVec::norm() const {
  double sq = 0.0;
  for (const auto& [i, v] : entries) sq += v * v;
  return std::sqrt(sq);
}

void SparseVec::l2_normalize() {
  double n = norm();
  if (n < 1e-12) return;
  for (auto& [i, v] : entries) v /= n;
}

SparseVec text_features(const std::string& text, int buckets) {
  std::map<uint32_t, double> tf;
  auto bump = [&](std::string_view gram) {
    tf[static_cast<uint32_t>(fnv1a64(gram) % static_cast<uint64_t>(buckets))] += 1.0;
  };

  std::vector<std::string> words = tokenize_words(text);
  for (const auto& w : words) bump(w);
  for (size_t i = 0; i + 1 < words.size(); ++i) bump(words[i] + "_" + words[i + 1]);

  // character 3-grams over the normalized text with single spaces
  std::string norm;
  for (const auto& w : words) {
    if (!norm.empty()) norm.push_back(' ');
    norm += w;
  }
  if (norm.size() >= 3)
    for (size_t i = 0; i + 3 <= norm.size(); ++i) bump(std::string_view(norm).substr(i, 3));

  SparseVec out;
  out.entries.assign(tf.begin(), tf.end());
  return out;
}

std::string to_string(PreprocessKind k) {
  return k == PreprocessKind::center_crop ? "center_crop" : "direct_resize";
}

PreprocessKind preprocess_kind_from(const std::string& s) {
  if (s == "direct_resize") return PreprocessKind::direct_resize;
  if (s == "center_crop") return PreprocessKind::center_crop;
  throw ValidationError("unknown preprocess mode: '" + s + "'");
}

namespace {

// area-weighted box resample of a source window to side x side
std::vector<float> resample_region(const synth::PixelGrid& src, double x0, double y0,
                                   double w0, double h0, int side) {
  std::vector<float> out(static_cast<size_t>(side) * side, 0.0f);
  double sx = w0 / side, sy = h0 / side;
  for (int r = 0; r < side; ++r) {
    double ry0 = y0 + r * sy, ry1 = ry0 + sy;
    int sr0 = std::max(0, static_cast<int>(std::floor(ry0)));
    int sr1 = std::min(src.h - 1, static_cast<int>(std::ceil(ry1)) - 1);
    for (int c = 0; c < side; ++c) {
      double cx0 = x0 + c * sx, cx1 = cx0 + sx;
      int sc0 = std::max(0, static_cast<int>(std::floor(cx0)));
      int sc1 = std::min(src.w - 1, static_cast<int>(std::ceil(cx1)) - 1);
      double acc = 0.0, area = 0.0;
      for (int sr = sr0; sr <= sr1; ++sr) {
        double oy = std::min<double>(ry1, sr + 1) - std::max<double>(ry0, sr);
        if (oy <= 0) continue;
        for (int sc = sc0; sc <= sc1; ++sc) {
          double ox = std::min<double>(cx1, sc + 1) - std::max<double>(cx0, sc);
          if (ox <= 0) continue;
          acc += ox * oy * src.at(sr, sc);
          area += ox * oy;
        }
      }
      out[static_cast<size_t>(r) * side + c] = area > 0 ? static_cast<float>(acc / area) : 0.0f;
    }
  }
  return out;
}

struct CropWindow {
  double x0 = 0, y0 = 0, side = 0;
};

CropWindow crop_window(int w, int h) {
  double side = std::min(w, h);
  return {(w - side) / 2.0, (h - side) / 2.0, side};
}

}  // namespace

synth::PixelGrid preprocess(const synth::PixelGrid& grid, PreprocessMode mode) {
  if (mode.target_side < 32) throw ValidationError("preprocess target side below 32");
  const int S = mode.target_side;
  synth::PixelGrid out;
  out.w = S;
  out.h = S;
  if (mode.kind == PreprocessKind::direct_resize) {
    out.occupancy = resample_region(grid, 0, 0, grid.w, grid.h, S);
    double fx = static_cast<double>(S) / grid.w, fy = static_cast<double>(S) / grid.h;
    for (const auto& a : grid.text_anchors)
      out.text_anchors.push_back({a.text, a.x * fx, a.y * fy, a.role});
  } else {
    CropWindow cw = crop_window(grid.w, grid.h);
    out.occupancy = resample_region(grid, cw.x0, cw.y0, cw.side, cw.side, S);
    double f = static_cast<double>(S) / cw.side;
    for (const auto& a : grid.text_anchors) {
      if (a.x >= cw.x0 && a.x < cw.x0 + cw.side && a.y >= cw.y0 && a.y < cw.y0 + cw.side)
        out.text_anchors.push_back({a.text, (a.x - cw.x0) * f, (a.y - cw.y0) * f, a.role});
    }
  }
  return out;
}

std::vector<synth::TextAnchor> preprocessed_anchors(const ChartSpec& spec,
                                                    PreprocessMode mode) {
  synth::RenderGeometry g = synth::render_geometry(spec);
  std::vector<synth::TextAnchor> out;
  if (mode.kind == PreprocessKind::direct_resize) {
    double fx = static_cast<double>(mode.target_side) / g.w;
    double fy = static_cast<double>(mode.target_side) / g.h;
    for (const auto& t : g.texts) out.push_back({t.text, t.cx * fx, t.cy * fy, t.role});
  } else {
    CropWindow cw = crop_window(g.w, g.h);
    double f = static_cast<double>(mode.target_side) / cw.side;
    for (const auto& t : g.texts)
      if (t.cx >= cw.x0 && t.cx < cw.x0 + cw.side && t.cy >= cw.y0 && t.cy < cw.y0 + cw.side)
        out.push_back({t.text, (t.cx - cw.x0) * f, (t.cy - cw.y0) * f, t.role});
  }
  return out;
}

ChartFeatures extract_chart_features(const ChartSpec& spec, PreprocessMode mode,
                                     const FeatureConfig& fc) {
  synth::PixelGrid raw = synth::rasterize(spec);
  synth::PixelGrid pre = preprocess(raw, mode);

  ChartFeatures f;
  std::vector<float> pooled =
      resample_region(pre, 0, 0, pre.w, pre.h, fc.grid_side);
  f.grid.assign(pooled.begin(), pooled.end());

  std::string ocr_text;
  for (const auto& a : pre.text_anchors) {
    if (!ocr_text.empty()) ocr_text.push_back(' ');
    ocr_text += a.text;
  }
  f.ocr = text_features(ocr_text, fc.text_buckets);
  return f;
}

SparseVec chart_input(const ChartFeatures& f, const FeatureConfig& fc) {
  SparseVec x;
  const uint32_t grid_cells = static_cast<uint32_t>(fc.grid_side * fc.grid_side);
  for (uint32_t i = 0; i < grid_cells && i < f.grid.size(); ++i)
    if (f.grid[i] != 0.0) x.entries.push_back({i, f.grid[i]});
  for (const auto& [i, v] : f.ocr.entries) x.entries.push_back({grid_cells + i, v});
  x.l2_normalize();
  return x;
}

FeatureConfig DualEncoderModel::feature_config() const {
  FeatureConfig fc;
  fc.text_buckets = f_text;
  int grid_cells = f_chart - f_text;
  fc.grid_side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(grid_cells))));
  if (fc.grid_side * fc.grid_side + f_text != f_chart)
    throw ValidationError("chart feature dim is not grid^2 + text buckets");
  return fc;
}

DualEncoderModel DualEncoderModel::random_init(int f_text, int f_chart, int d, double tau,
                                               uint64_t seed) {
  if (tau <= 0.0) throw ValidationError("temperature must be positive");
  DualEncoderModel m;
  m.f_text = f_text;
  m.f_chart = f_chart;
  m.d = d;
  m.temperature = tau;
  m.init_seed = seed;
  Rng rng(sub_seed(seed, "model_init"));
  auto fill = [&](std::vector<double>& w, int fan_in) {
    double a = std::sqrt(6.0 / (fan_in + d));
    for (double& v : w) v = rng.uniform(-a, a);
  };
  m.w_text.resize(static_cast<size_t>(f_text) * d);
  m.w_chart.resize(static_cast<size_t>(f_chart) * d);
  fill(m.w_text, f_text);
  fill(m.w_chart, f_chart);
  return m;
}

std::vector<double> project(const std::vector<double>& weights, int d, const SparseVec& x) {
  std::vector<double> u(static_cast<size_t>(d), 0.0);
  for (const auto& [idx, val] : x.entries) {
    const double* row = weights.data() + static_cast<size_t>(idx) * d;
    for (int j = 0; j < d; ++j) u[static_cast<size_t>(j)] += val * row[j];
  }
  return u;
}

EmbeddingVector embed_text(const DualEncoderModel& model, const std::string& text) {
  SparseVec x = text_features(text, model.f_text);
  x.l2_normalize();
  EmbeddingVector v;
  v.dim = model.d;
  v.values = project(model.w_text, model.d, x);
  v.normalize();
  return v;
}

EmbeddingVector embed_chart(const DualEncoderModel& model, const ChartSpec& spec,
                            PreprocessMode mode) {
  FeatureConfig fc = model.feature_config();
  SparseVec x = chart_input(extract_chart_features(spec, mode, fc), fc);
  EmbeddingVector v;
  v.dim = model.d;
  v.values = project(model.w_chart, model.d, x);
  v.normalize();
  return v;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim != b.dim)
    throw ValidationError("cosine dim mismatch: " + std::to_string(a.dim) + " vs " +
                          std::to_string(b.dim));
  double dot = 0.0;
  for (int i = 0; i < a.dim; ++i)
    dot += a.values[static_cast<size_t>(i)] * b.values[static_cast<size_t>(i)];
  return std::clamp(dot, -1.0, 1.0);
}

EmbeddingVector feature_embedding(const ChartSpec& spec, PreprocessMode mode,
                                  const FeatureConfig& fc) {
  SparseVec x = chart_input(extract_chart_features(spec, mode, fc), fc);
  EmbeddingVector v;
  v.dim = fc.chart_dim();
  v.values.assign(static_cast<size_t>(v.dim), 0.0);
  for (const auto& [i, val] : x.entries) v.values[i] = val;
  v.normalize();
  return v;
}

std::vector<EmbeddingVector> remote_embed(const std::vector<EmbedInput>& inputs,
                                          const EndpointConfig& cfg) {
  if (inputs.empty()) return {};
  if (cfg.url.empty()) throw NetworkError("no embedding endpoint configured");

  const size_t chunk_size = 32;
  size_t n_chunks = (inputs.size() + chunk_size - 1) / chunk_size;
  std::vector<std::vector<EmbeddingVector>> chunk_out(n_chunks);
  std::vector<std::string> errors(n_chunks);

  auto run_chunk = [&](size_t ci) {
    size_t lo = ci * chunk_size, hi = std::min(inputs.size(), lo + chunk_size);
    nlohmann::json body;
    body["inputs"] = nlohmann::json::array();
    for (size_t i = lo; i < hi; ++i) {
      if (inputs[i].svg)
        body["inputs"].push_back({{"svg", *inputs[i].svg}});
      else
        body["inputs"].push_back(inputs[i].text);
    }
    try {
      nlohmann::json resp = detail::http_post_json(cfg.url, body, cfg.timeout_sec,
                                                   cfg.max_retries);
      if (!resp.contains("vectors") || !resp["vectors"].is_array())
        throw NetworkError("embedding response missing 'vectors'");
      const auto& vecs = resp["vectors"];
      if (vecs.size() != hi - lo)
        throw NetworkError("embedding response count mismatch");
      for (const auto& jv : vecs) {
        EmbeddingVector v;
        v.values = jv.get<std::vector<double>>();
        v.dim = static_cast<int>(v.values.size());
        v.normalize();
        chunk_out[ci].push_back(std::move(v));
      }
    } catch (const std::exception& e) {
      errors[ci] = e.what();
    }
  };

  size_t workers = std::min<size_t>(static_cast<size_t>(std::max(1, cfg.max_in_flight)),
                                    n_chunks);
  std::vector<std::thread> threads;
  for (size_t t = 0; t < workers; ++t)
    threads.emplace_back([&, t] {
      for (size_t ci = t; ci < n_chunks; ci += workers) run_chunk(ci);
    });
  for (auto& th : threads) th.join();

  for (const auto& e : errors)
    if (!e.empty()) throw NetworkError("remote embed failed: " + e);

  std::vector<EmbeddingVector> out;
  int dim = -1;
  for (auto& chunk : chunk_out)
    for (auto& v : chunk) {
      if (dim < 0) dim = v.dim;
      if (v.dim != dim)
        throw ValidationError("mixed embedding dimensions in remote response");
      out.push_back(std::move(v));
    }
  return out;
}

}  // namespace csem::enc
