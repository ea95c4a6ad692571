#include "csem/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;

namespace csem::train {

void TrainConfig::validate() const {
  if (levels.empty()) throw ValidationError("training levels must be non-empty");
  if (batch_size < 2) throw ValidationError("batch_size must be >= 2");
  if (learning_rate <= 0.0) throw ValidationError("learning_rate must be positive");
  if (tau <= 0.0) throw ValidationError("tau must be positive");
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (embed_dim < 1) throw ValidationError("embed_dim must be >= 1");
}

BuildPairsResult build_pairs(const std::vector<ChartSpec>& charts,
                             const std::vector<Insight>& insights,
                             const std::set<InsightLevel>& levels) {
  if (levels.empty()) throw ValidationError("build_pairs: empty level set");
  std::unordered_map<std::string, std::map<InsightLevel, const Insight*>> by_chart;
  for (const auto& ins : insights) by_chart[ins.chart_id][ins.level] = &ins;

  BuildPairsResult out;
  for (const auto& chart : charts) {
    auto it = by_chart.find(chart.id);
    bool missing = false;
    for (InsightLevel level : levels) {
      if (it == by_chart.end() || !it->second.count(level)) {
        missing = true;
        continue;
      }
      out.pairs.push_back({chart.id, it->second.at(level)->text, level});
    }
    if (missing) ++out.skipped_charts;
  }
  return out;
}

// ------------------------------------------------------------- info_nce

namespace {

constexpr double kNormGuard = 1e-12;

// normalize rows in place; returns per-row original norms (0 marks the
// uniform-sentinel branch, which blocks gradient flow)
std::vector<double> normalize_rows(std::vector<double>& rows, int batch, int dim) {
  std::vector<double> norms(static_cast<size_t>(batch), 0.0);
  for (int i = 0; i < batch; ++i) {
    double* row = rows.data() + static_cast<size_t>(i) * dim;
    double sq = 0.0;
    for (int j = 0; j < dim; ++j) sq += row[j] * row[j];
    double n = std::sqrt(sq);
    if (n < kNormGuard) {
      double u = 1.0 / std::sqrt(static_cast<double>(dim));
      for (int j = 0; j < dim; ++j) row[j] = u;
      norms[static_cast<size_t>(i)] = 0.0;
    } else {
      for (int j = 0; j < dim; ++j) row[j] /= n;
      norms[static_cast<size_t>(i)] = n;
    }
  }
  return norms;
}

}  // namespace

InfoNceResult info_nce(const std::vector<double>& text_vecs,
                       const std::vector<double>& chart_vecs, int batch, int dim,
                       double tau) {
  if (batch < 2) throw ValidationError("info_nce needs a batch of at least 2");
  if (tau <= 0.0) throw ValidationError("info_nce tau must be positive");
  if (text_vecs.size() != static_cast<size_t>(batch) * dim ||
      chart_vecs.size() != static_cast<size_t>(batch) * dim)
    throw ValidationError("info_nce input shape mismatch");

  std::vector<double> t = text_vecs, c = chart_vecs;
  std::vector<double> tn = normalize_rows(t, batch, dim);
  std::vector<double> cn = normalize_rows(c, batch, dim);

  const size_t B = static_cast<size_t>(batch);
  std::vector<double> S(B * B, 0.0);
  for (size_t i = 0; i < B; ++i)
    for (size_t j = 0; j < B; ++j) {
      double dot = 0.0;
      const double* ti = t.data() + i * dim;
      const double* cj = c.data() + j * dim;
      for (int k = 0; k < dim; ++k) dot += ti[k] * cj[k];
      S[i * B + j] = dot / tau;
    }

  // row softmax (text -> chart) and column softmax (chart -> text)
  std::vector<double> P(B * B), Q(B * B);
  double loss = 0.0;
  for (size_t i = 0; i < B; ++i) {
    double mx = S[i * B];
    for (size_t j = 1; j < B; ++j) mx = std::max(mx, S[i * B + j]);
    double z = 0.0;
    for (size_t j = 0; j < B; ++j) z += std::exp(S[i * B + j] - mx);
    for (size_t j = 0; j < B; ++j) P[i * B + j] = std::exp(S[i * B + j] - mx) / z;
    loss += -(S[i * B + i] - mx - std::log(z));
  }
  for (size_t j = 0; j < B; ++j) {
    double mx = S[j];
    for (size_t i = 1; i < B; ++i) mx = std::max(mx, S[i * B + j]);
    double z = 0.0;
    for (size_t i = 0; i < B; ++i) z += std::exp(S[i * B + j] - mx);
    for (size_t i = 0; i < B; ++i) Q[i * B + j] = std::exp(S[i * B + j] - mx) / z;
    loss += -(S[j * B + j] - mx - std::log(z));
  }
  loss /= 2.0 * static_cast<double>(batch);

  // dL/dS then back through the dot products and the normalization
  InfoNceResult res;
  res.loss = loss;
  res.grad_text.assign(B * static_cast<size_t>(dim), 0.0);
  res.grad_chart.assign(B * static_cast<size_t>(dim), 0.0);
  const double scale = 1.0 / (2.0 * static_cast<double>(batch) * tau);

  std::vector<double> G(B * B);
  for (size_t i = 0; i < B; ++i)
    for (size_t j = 0; j < B; ++j) {
      double delta = i == j ? 1.0 : 0.0;
      G[i * B + j] = scale * ((P[i * B + j] - delta) + (Q[i * B + j] - delta));
    }

  for (size_t i = 0; i < B; ++i) {
    double* gt = res.grad_text.data() + i * dim;
    for (size_t j = 0; j < B; ++j) {
      const double g = G[i * B + j];
      const double* cj = c.data() + j * dim;
      for (int k = 0; k < dim; ++k) gt[k] += g * cj[k];
    }
  }
  for (size_t j = 0; j < B; ++j) {
    double* gc = res.grad_chart.data() + j * dim;
    for (size_t i = 0; i < B; ++i) {
      const double g = G[i * B + j];
      const double* ti = t.data() + i * dim;
      for (int k = 0; k < dim; ++k) gc[k] += g * ti[k];
    }
  }

  auto chain = [&](std::vector<double>& grad, const std::vector<double>& unit,
                   const std::vector<double>& norms) {
    for (size_t i = 0; i < B; ++i) {
      double* g = grad.data() + i * dim;
      const double* v = unit.data() + i * dim;
      double n = norms[i];
      if (n == 0.0) {
        std::fill(g, g + dim, 0.0);  // sentinel branch is constant
        continue;
      }
      double dot = 0.0;
      for (int k = 0; k < dim; ++k) dot += g[k] * v[k];
      for (int k = 0; k < dim; ++k) g[k] = (g[k] - dot * v[k]) / n;
    }
  };
  chain(res.grad_text, t, tn);
  chain(res.grad_chart, c, cn);
  return res;
}

// ------------------------------------------------------------- training

ChartInputMap compute_chart_inputs(const std::vector<ChartSpec>& charts,
                                   enc::PreprocessMode mode,
                                   const enc::FeatureConfig& fc) {
  std::vector<enc::SparseVec> inputs(charts.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (size_t i = 0; i < charts.size(); ++i)
    inputs[i] = enc::chart_input(enc::extract_chart_features(charts[i], mode, fc), fc);

  ChartInputMap out;
  for (size_t i = 0; i < charts.size(); ++i) out[charts[i].id] = std::move(inputs[i]);
  return out;
}

namespace {

struct Tower {
  std::vector<double>* w;
  std::vector<double> velocity;
};

// forward a batch of sparse inputs through one tower (parallel over rows)
void forward(const std::vector<double>& w, int dim,
             const std::vector<const enc::SparseVec*>& xs, std::vector<double>& out) {
  const int B = static_cast<int>(xs.size());
  out.assign(static_cast<size_t>(B) * dim, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < B; ++i) {
    double* u = out.data() + static_cast<size_t>(i) * dim;
    for (const auto& [idx, val] : xs[i]->entries) {
      const double* row = w.data() + static_cast<size_t>(idx) * dim;
      for (int j = 0; j < dim; ++j) u[j] += val * row[j];
    }
  }
}

// momentum step: v = mu*v + sum_i x_i (x) g_i ; w -= lr*v
void sgd_step(std::vector<double>& w, std::vector<double>& v, double mu, double lr, int dim,
              const std::vector<const enc::SparseVec*>& xs, const std::vector<double>& grads) {
  const size_t total = w.size();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (size_t k = 0; k < total; ++k) v[k] *= mu;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double* g = grads.data() + i * dim;
    for (const auto& [idx, val] : xs[i]->entries) {
      double* vrow = v.data() + static_cast<size_t>(idx) * dim;
      for (int j = 0; j < dim; ++j) vrow[j] += val * g[j];
    }
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (size_t k = 0; k < total; ++k) w[k] -= lr * v[k];
}

}  // namespace

TrainResult train_on_inputs(const std::vector<TrainPair>& pairs,
                            const ChartInputMap& chart_inputs, const TrainConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(pairs.size()) < cfg.batch_size)
    throw ValidationError("insufficient training pairs: have " +
                          std::to_string(pairs.size()) + ", need at least " +
                          std::to_string(cfg.batch_size));

  const int d = cfg.embed_dim;
  enc::DualEncoderModel model = enc::DualEncoderModel::random_init(
      cfg.features.text_buckets, cfg.features.chart_dim(), d, cfg.tau,
      sub_seed(cfg.seed, "init"));

  // pre-featurize the text side once
  std::vector<enc::SparseVec> text_inputs(pairs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (size_t i = 0; i < pairs.size(); ++i) {
    text_inputs[i] = enc::text_features(pairs[i].text, cfg.features.text_buckets);
    text_inputs[i].l2_normalize();
  }
  std::vector<const enc::SparseVec*> chart_side(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    auto it = chart_inputs.find(pairs[i].chart_id);
    if (it == chart_inputs.end())
      throw ValidationError("no chart features for '" + pairs[i].chart_id + "'");
    chart_side[i] = &it->second;
  }

  std::vector<double> vel_text(model.w_text.size(), 0.0);
  std::vector<double> vel_chart(model.w_chart.size(), 0.0);

  TrainResult result;
  std::vector<size_t> order(pairs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  if (!cfg.checkpoint_dir.empty()) {
    std::error_code ec;
    fs::create_directories(cfg.checkpoint_dir, ec);
    if (ec) throw IoError("cannot create checkpoint dir: " + cfg.checkpoint_dir);
  }

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(sub_seed(cfg.seed, "epoch:" + std::to_string(epoch)));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    int n_batches = 0;
    size_t pos = 0;
    while (pos < order.size()) {
      size_t take = std::min<size_t>(static_cast<size_t>(cfg.batch_size), order.size() - pos);
      if (take < 2) break;  // a trailing single pair has no negatives
      std::vector<const enc::SparseVec*> bx_text(take), bx_chart(take);
      for (size_t i = 0; i < take; ++i) {
        bx_text[i] = &text_inputs[order[pos + i]];
        bx_chart[i] = chart_side[order[pos + i]];
      }
      pos += take;

      std::vector<double> u, v;
      forward(model.w_text, d, bx_text, u);
      forward(model.w_chart, d, bx_chart, v);
      InfoNceResult nce = info_nce(u, v, static_cast<int>(take), d, cfg.tau);
      loss_sum += nce.loss;
      ++n_batches;

      sgd_step(model.w_text, vel_text, cfg.momentum, cfg.learning_rate, d, bx_text,
               nce.grad_text);
      sgd_step(model.w_chart, vel_chart, cfg.momentum, cfg.learning_rate, d, bx_chart,
               nce.grad_chart);
    }
    result.log.epoch_mean_loss.push_back(n_batches > 0 ? loss_sum / n_batches : 0.0);

    if (!cfg.checkpoint_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof(name), "epoch_%03d.bin", epoch + 1);
      save_checkpoint(model, (fs::path(cfg.checkpoint_dir) / name).string());
    }
  }

  result.model = std::move(model);
  return result;
}

TrainResult train(const std::vector<ChartSpec>& charts,
                  const std::vector<Insight>& insights, const TrainConfig& cfg) {
  cfg.validate();
  BuildPairsResult pairs = build_pairs(charts, insights, cfg.levels);
  ChartInputMap inputs = compute_chart_inputs(charts, cfg.preprocess, cfg.features);
  return train_on_inputs(pairs.pairs, inputs, cfg);
}

// ----------------------------------------------------------- grad_check

namespace {

double batch_loss(const enc::DualEncoderModel& model, const GradCheckBatch& batch) {
  const int B = static_cast<int>(batch.text_inputs.size());
  std::vector<const enc::SparseVec*> xt(B), xc(B);
  for (int i = 0; i < B; ++i) {
    xt[static_cast<size_t>(i)] = &batch.text_inputs[static_cast<size_t>(i)];
    xc[static_cast<size_t>(i)] = &batch.chart_inputs[static_cast<size_t>(i)];
  }
  std::vector<double> u, v;
  forward(model.w_text, model.d, xt, u);
  forward(model.w_chart, model.d, xc, v);
  return info_nce(u, v, B, model.d, model.temperature).loss;
}

}  // namespace

double grad_check(const enc::DualEncoderModel& model, const GradCheckBatch& batch,
                  double eps, uint64_t coord_seed, int n_coords) {
  if (batch.text_inputs.size() != batch.chart_inputs.size() || batch.text_inputs.size() < 2)
    throw ValidationError("grad_check batch must have >= 2 aligned pairs");

  const int B = static_cast<int>(batch.text_inputs.size());
  const int d = model.d;
  std::vector<const enc::SparseVec*> xt(batch.text_inputs.size()), xc(batch.chart_inputs.size());
  for (size_t i = 0; i < batch.text_inputs.size(); ++i) {
    xt[i] = &batch.text_inputs[i];
    xc[i] = &batch.chart_inputs[i];
  }
  std::vector<double> u, v;
  forward(model.w_text, d, xt, u);
  forward(model.w_chart, d, xc, v);
  InfoNceResult nce = info_nce(u, v, B, d, model.temperature);

  // analytic dL/dW via the sparse chain rule
  std::vector<double> dwt(model.w_text.size(), 0.0), dwc(model.w_chart.size(), 0.0);
  for (int i = 0; i < B; ++i) {
    const double* g = nce.grad_text.data() + static_cast<size_t>(i) * d;
    for (const auto& [idx, val] : xt[static_cast<size_t>(i)]->entries)
      for (int j = 0; j < d; ++j) dwt[static_cast<size_t>(idx) * d + j] += val * g[j];
    const double* gc = nce.grad_chart.data() + static_cast<size_t>(i) * d;
    for (const auto& [idx, val] : xc[static_cast<size_t>(i)]->entries)
      for (int j = 0; j < d; ++j) dwc[static_cast<size_t>(idx) * d + j] += val * gc[j];
  }

  Rng rng(coord_seed);
  enc::DualEncoderModel scratch = model;
  double max_rel = 0.0;
  for (int k = 0; k < n_coords; ++k) {
    bool text_side = rng.uniform() < 0.5;
    std::vector<double>& w = text_side ? scratch.w_text : scratch.w_chart;
    const std::vector<double>& dw = text_side ? dwt : dwc;
    size_t coord = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(w.size()) - 1));
    double orig = w[coord];
    w[coord] = orig + eps;
    double lp = batch_loss(scratch, batch);
    w[coord] = orig - eps;
    double lm = batch_loss(scratch, batch);
    w[coord] = orig;
    double numeric = (lp - lm) / (2.0 * eps);
    double analytic = dw[coord];
    double rel = std::fabs(analytic - numeric) /
                 std::max({std::fabs(analytic), std::fabs(numeric), 1e-12});
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

// ----------------------------------------------------------- checkpoint

namespace {
template <typename T>
void write_le(std::ofstream& f, T v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& f, const std::string& path) {
  T v;
  if (!f.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw IoError("truncated checkpoint: " + path);
  return v;
}
}  // namespace

void save_checkpoint(const enc::DualEncoderModel& model, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write("CSDE", 4);
  write_le(f, static_cast<uint32_t>(model.f_text));
  write_le(f, static_cast<uint32_t>(model.f_chart));
  write_le(f, static_cast<uint32_t>(model.d));
  write_le(f, static_cast<float>(model.temperature));
  for (double w : model.w_text) write_le(f, static_cast<float>(w));
  for (double w : model.w_chart) write_le(f, static_cast<float>(w));
  if (!f) throw IoError("write failure: " + path);
}

enc::DualEncoderModel load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for reading: " + path);
  char magic[4];
  if (!f.read(magic, 4) || std::memcmp(magic, "CSDE", 4) != 0)
    throw ValidationError("bad checkpoint magic in " + path);
  enc::DualEncoderModel m;
  m.f_text = static_cast<int>(read_le<uint32_t>(f, path));
  m.f_chart = static_cast<int>(read_le<uint32_t>(f, path));
  m.d = static_cast<int>(read_le<uint32_t>(f, path));
  m.temperature = read_le<float>(f, path);
  m.init_seed = 0;
  m.w_text.resize(static_cast<size_t>(m.f_text) * m.d);
  m.w_chart.resize(static_cast<size_t>(m.f_chart) * m.d);
  for (double& w : m.w_text) w = read_le<float>(f, path);
  for (double& w : m.w_chart) w = read_le<float>(f, path);
  return m;
}

void save_trainlog(const TrainLog& log, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << "epoch,mean_loss\n";
  for (size_t i = 0; i < log.epoch_mean_loss.size(); ++i) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", log.epoch_mean_loss[i]);
    f << (i + 1) << "," << buf << "\n";
  }
  if (!f) throw IoError("write failure: " + path);
}

}  // namespace csem::train
