// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exit code = number of failed criteria.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "csem/benchgen.hpp"
#include "csem/chartsynth.hpp"
#include "csem/encoder.hpp"
#include "csem/evalharness.hpp"
#include "csem/pipeline.hpp"
#include "csem/reference.hpp"
#include "csem/retrieval.hpp"
#include "csem/statinsight.hpp"
#include "csem/trainer.hpp"

using namespace csem;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

namespace {

double secs(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

struct Check {
  bool ok = true;
  std::ostringstream msg;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (msg.tellp() > 0) msg << "; ";
      msg << what;
    }
  }
  void note(const std::string& s) {
    if (msg.tellp() > 0) msg << "; ";
    msg << s;
  }
};

std::vector<double> random_unit(Rng& rng, int dim) {
  std::vector<double> v(static_cast<size_t>(dim));
  double sq = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    sq += x * x;
  }
  double n = std::sqrt(sq);
  for (auto& x : v) x /= n;
  return v;
}

EmbeddingVector make_vec(std::vector<double> values) {
  EmbeddingVector v;
  v.dim = static_cast<int>(values.size());
  v.values = std::move(values);
  return v;
}

// ------------------------------------------------------- shared fixture

// One seeded 2,000-chart corpus with a held-out benchmark feeds criteria
// 6, 7, and 8.
struct Fixture {
  std::vector<ChartSpec> charts;
  std::vector<Insight> insights;
  train::ChartInputMap inputs_resize;
  train::ChartInputMap inputs_crop;
  std::vector<BenchmarkGroup> groups;
  std::vector<TextQuery> queries;
  std::map<uint64_t, enc::DualEncoderModel> resize_models;  // per training seed
  double build_seconds = 0.0;
};

constexpr uint64_t kCorpusSeed = 8611;
const std::array<uint64_t, 3> kTrainSeeds = {1001, 1002, 1003};

Fixture& fixture() {
  static Fixture fx;
  static bool built = false;
  if (built) return fx;
  auto t0 = Clock::now();

  synth::CorpusConfig cc;
  cc.seed = kCorpusSeed;
  cc.n_tables = 400;
  cc.max_charts_per_table = 3;
  cc.style_variants = 5;
  cc.target_charts = 2000;
  fx.charts = synth::build_corpus(cc);
  fx.insights = stat::synthesize_all(fx.charts).insights;

  enc::FeatureConfig fc;
  fx.inputs_resize = train::compute_chart_inputs(
      fx.charts, {enc::PreprocessKind::direct_resize, 512}, fc);
  fx.inputs_crop = train::compute_chart_inputs(
      fx.charts, {enc::PreprocessKind::center_crop, 512}, fc);

  // grouping encoder: identity projection over the resize chart features
  std::vector<std::pair<std::string, EmbeddingVector>> fvecs(fx.charts.size());
  for (size_t i = 0; i < fx.charts.size(); ++i) {
    const auto& x = fx.inputs_resize.at(fx.charts[i].id);
    EmbeddingVector v;
    v.dim = fc.chart_dim();
    v.values.assign(static_cast<size_t>(v.dim), 0.0);
    for (const auto& [k, val] : x.entries) v.values[k] = val;
    v.normalize();
    fvecs[i] = {fx.charts[i].id, std::move(v)};
  }
  fx.groups = bench::group_charts(fvecs, bench::GroupingConfig{});

  std::map<std::string, const ChartSpec*> by_id;
  for (const auto& c : fx.charts) by_id[c.id] = &c;
  bench::VoteSimParams vp;
  std::vector<bench::VoteRecord> votes;
  for (auto& g : fx.groups) {
    std::vector<ChartSpec> ds;
    for (const auto& d : g.distractor_ids) ds.push_back(*by_id.at(d));
    bench::QueryGenResult qr = bench::gen_queries(g, *by_id.at(g.target_id), ds);
    g.precise_query = qr.precise;
    g.fuzzy_query = qr.fuzzy;
    votes.push_back(bench::simulate_votes(qr.precise, qr.discriminative, vp, kCorpusSeed));
    votes.push_back(bench::simulate_votes(qr.fuzzy, true, vp, kCorpusSeed));
  }
  bench::AssembleResult assembled = bench::assemble_benchmark(fx.groups, votes);
  fx.groups = assembled.groups;
  fx.queries = assembled.accepted_queries;

  fx.build_seconds = secs(t0, Clock::now());
  built = true;
  return fx;
}

enc::DualEncoderModel train_full(const Fixture& fx, uint64_t seed,
                                 const train::ChartInputMap& inputs,
                                 enc::PreprocessKind kind) {
  train::TrainConfig cfg;
  cfg.seed = seed;
  cfg.preprocess.kind = kind;
  auto pairs = train::build_pairs(fx.charts, fx.insights, cfg.levels);
  return train::train_on_inputs(pairs.pairs, inputs, cfg).model;
}

double r_at_10(const Fixture& fx, const enc::DualEncoderModel& model,
               const train::ChartInputMap& inputs) {
  eval::MetricConfig mc;
  retr::VectorIndex index = eval::index_from_inputs(inputs, model);
  return eval::evaluate(index, fx.queries, model, mc).combined.r_at.at(10);
}

// -------------------------------------------------------- criteria 1-10

bool criterion1_metric_oracle(Check& c) {
  auto t0 = Clock::now();
  eval::MetricConfig cfg;
  std::vector<std::pair<std::string, std::optional<int>>> ranks = {
      {"q1", 1}, {"q2", 3}, {"q3", std::nullopt}};
  EvalReport rep = eval::report_from_ranks(ranks, cfg, "fixture");
  c.require(std::fabs(rep.mrr_at_10 - 4.0 / 9.0) <= 1e-12, "MRR@10 of [1,3,none]");
  c.require(std::fabs(rep.ndcg_at_10 - 0.5) <= 1e-12, "NDCG@10 of [1,3,none]");
  c.require(std::fabs(rep.r_at.at(1) - 1.0 / 3.0) <= 1e-12, "R@1 of [1,3,none]");
  c.require(std::fabs(rep.r_at.at(5) - 2.0 / 3.0) <= 1e-12, "R@5 of [1,3,none]");
  c.require(std::fabs(eval::mrr_contrib(2, 10) - 0.5) <= 1e-12, "MRR term rank 2");
  c.require(std::fabs(eval::ndcg_contrib(2, 10) - 1.0 / std::log2(3.0)) <= 1e-12,
            "NDCG term rank 2");
  c.require(eval::recall_at_k(12, 10) == 0.0 && eval::mrr_contrib(12, 10) == 0.0 &&
                eval::ndcg_contrib(12, 10) == 0.0,
            "rank 12 contributes zero at k=10");

  Rng rng(90001);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::pair<std::string, std::optional<int>>> rs;
    int n = static_cast<int>(rng.uniform_int(1, 50));
    for (int i = 0; i < n; ++i) {
      std::optional<int> r;
      if (rng.uniform() < 0.85) r = static_cast<int>(rng.uniform_int(1, 25));
      rs.push_back({"q" + std::to_string(i), r});
    }
    EvalReport p = eval::report_from_ranks(rs, cfg, "prop");
    c.require(p.r_at.at(1) <= p.r_at.at(5) + 1e-15, "R@1 <= R@5");
    c.require(p.r_at.at(5) <= p.r_at.at(10) + 1e-15, "R@5 <= R@10");
    c.require(p.ndcg_at_10 >= p.mrr_at_10 - 1e-15, "NDCG@10 >= MRR@10");
    if (!c.ok) break;
  }
  double dt = secs(t0, Clock::now());
  c.require(dt < 5.0, "runtime " + std::to_string(dt) + "s exceeds 5s");
  return c.ok;
}

bool criterion2_table5_fixture(Check& c) {
  auto t0 = Clock::now();
  struct Row {
    const char* tag;
    std::array<double, 6> six;
    double printed;
  };
  const std::vector<Row> rows = {
      {"baseline", {62.56, 37.99, 43.90, 51.91, 30.29, 35.33}, 43.66},
      {"V", {69.64, 44.39, 48.69, 56.28, 27.27, 34.29}, 46.67},
      {"S", {66.15, 45.18, 50.18, 57.25, 32.75, 38.60}, 48.35},
      {"T", {65.64, 44.44, 49.52, 58.78, 32.24, 38.59}, 48.20},
      {"V+T", {71.79, 44.96, 51.40, 60.31, 35.24, 41.17}, 50.81},
      {"V+S", {66.15, 43.26, 48.74, 54.96, 32.20, 37.66}, 47.16},
      {"S+T", {65.64, 43.53, 48.87, 54.96, 30.44, 36.23}, 46.61},
      {"full", {70.26, 49.30, 61.30, 61.83, 38.96, 44.41}, 54.34},
  };
  for (const auto& row : rows) {
    double mean = eval::overall_of_six(row.six);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "row %s: computed Overall %.2f vs printed %.2f",
                  row.tag, mean, row.printed);
    c.require(std::fabs(mean - row.printed) <= 0.01, buf);
  }
  double dt = secs(t0, Clock::now());
  c.require(dt < 1.0, "runtime exceeds 1s");
  return c.ok;
}

bool criterion3_grouping_oracle(Check& c) {
  auto t0 = Clock::now();
  Rng rng(90003);
  int instance = 0;
  auto compare = [&](const std::vector<std::pair<std::string, EmbeddingVector>>& vectors,
                     const bench::GroupingConfig& cfg) {
    auto fast = bench::group_charts(vectors, cfg);
    auto slow = ref::group_reference(vectors, cfg);
    bool same = fast.size() == slow.size();
    if (same)
      for (size_t i = 0; i < fast.size(); ++i) {
        if (fast[i].target_id != slow[i].target_id ||
            fast[i].distractor_ids != slow[i].distractor_ids)
          same = false;
        else
          for (size_t j = 0; j < fast[i].anchor_similarities.size(); ++j)
            if (std::fabs(fast[i].anchor_similarities[j] - slow[i].anchor_similarities[j]) >
                1e-9)
              same = false;
      }
    c.require(same, "instance " + std::to_string(instance) + " diverged from brute force");
    ++instance;
  };

  for (int trial = 0; trial < 44; ++trial) {
    size_t n = static_cast<size_t>(rng.uniform_int(100, trial < 40 ? 800 : 2000));
    int dim = static_cast<int>(rng.uniform_int(8, 32));
    std::vector<std::pair<std::string, EmbeddingVector>> vectors;
    for (size_t i = 0; i < n; ++i) {
      char id[24];
      std::snprintf(id, sizeof(id), "c%05zu", i);
      vectors.push_back({id, make_vec(random_unit(rng, dim))});
    }
    for (size_t d = 0; d + 5 < n && d < 60; d += 5)
      for (size_t j = 1; j <= 4; ++j) vectors[d + j].second = vectors[d].second;
    bench::GroupingConfig cfg;
    cfg.threshold = trial % 4 == 0 ? 0.90 : rng.uniform(0.6, 0.95);
    cfg.distractor_reuse = trial % 3 != 0;
    compare(vectors, cfg);
    if (!c.ok) return false;
  }
  // boundary instances: companions sitting exactly at cosine 0.90
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<std::pair<std::string, EmbeddingVector>> vectors;
    int dim = 8;
    double s = std::sqrt(1.0 - 0.81);
    for (int cluster = 0; cluster < 3; ++cluster) {
      std::vector<double> anchor(dim, 0.0);
      anchor[static_cast<size_t>(cluster % dim)] = 1.0;
      char id[24];
      std::snprintf(id, sizeof(id), "c%05d", cluster * 10);
      vectors.push_back({id, make_vec(anchor)});
      for (int j = 1; j <= 4; ++j) {
        std::vector<double> v(dim, 0.0);
        v[static_cast<size_t>(cluster % dim)] = 0.9;
        v[static_cast<size_t>((cluster + j) % dim)] = s;
        std::snprintf(id, sizeof(id), "c%05d", cluster * 10 + j);
        vectors.push_back({id, make_vec(std::move(v))});
      }
    }
    for (int extra = 0; extra < 30; ++extra) {
      char id[24];
      std::snprintf(id, sizeof(id), "x%05d_%d", extra, trial);
      vectors.push_back({id, make_vec(random_unit(rng, dim))});
    }
    bench::GroupingConfig cfg;  // threshold exactly 0.90
    compare(vectors, cfg);
    if (!c.ok) return false;
  }
  double dt = secs(t0, Clock::now());
  char buf[64];
  std::snprintf(buf, sizeof(buf), "50 instances in %.1fs", dt);
  c.note(buf);
  c.require(dt < 60.0, "runtime exceeds 60s");
  return c.ok;
}

bool criterion4_search_oracle(Check& c) {
  Rng rng(90004);
  for (int trial = 0; trial < 100; ++trial) {
    size_t n = static_cast<size_t>(rng.uniform_int(10, 5000));
    int dim = static_cast<int>(rng.uniform_int(4, 128));
    std::vector<std::pair<std::string, EmbeddingVector>> entries;
    for (size_t i = 0; i < n; ++i) {
      char id[24];
      std::snprintf(id, sizeof(id), "c%06zu", i);
      entries.push_back({id, make_vec(random_unit(rng, dim))});
    }
    if (trial % 5 == 0)
      for (size_t i = 0; i + 1 < n && i < 40; i += 2)
        entries[i + 1].second = entries[i].second;  // exact ties
    retr::VectorIndex index = retr::build_index(entries);
    int k = static_cast<int>(rng.uniform_int(1, 25));
    EmbeddingVector q = make_vec(random_unit(rng, dim));
    RankedList fast = retr::search(index, q, k);
    RankedList slow = ref::search_reference(index, q, k);
    bool same = fast.entries.size() == slow.entries.size();
    if (same)
      for (size_t i = 0; i < fast.entries.size(); ++i)
        if (fast.entries[i].chart_id != slow.entries[i].chart_id ||
            fast.entries[i].score != slow.entries[i].score)
          same = false;
    c.require(same, "instance " + std::to_string(trial) + " diverged from full sort");
    if (!c.ok) return false;
  }

  // paper-scale batch: 326 queries against a 22,000-vector 128-d index
  std::vector<std::pair<std::string, EmbeddingVector>> entries;
  entries.reserve(22000);
  for (size_t i = 0; i < 22000; ++i) {
    char id[24];
    std::snprintf(id, sizeof(id), "c%06zu", i);
    entries.push_back({id, make_vec(random_unit(rng, 128))});
  }
  retr::VectorIndex big = retr::build_index(entries);
  std::vector<std::pair<std::string, EmbeddingVector>> queries;
  for (int i = 0; i < 326; ++i)
    queries.push_back({"q" + std::to_string(i), make_vec(random_unit(rng, 128))});
  auto tb = Clock::now();
  auto results = retr::batch_search(big, queries, 10);
  double batch_dt = secs(tb, Clock::now());
  c.require(results.size() == 326, "batch result count");
  char buf[96];
  std::snprintf(buf, sizeof(buf), "batch 326x22000 in %.3fs", batch_dt);
  c.note(buf);
  c.require(batch_dt < 2.0, "batch search exceeded 2s");
  return c.ok;
}

bool criterion5_gradient(Check& c) {
  auto t0 = Clock::now();
  Rng rng(90005);
  const int B = 8, d = 16;
  const double eps = 1e-5;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> t(B * d), ch(B * d);
    for (auto& x : t) x = rng.normal();
    for (auto& x : ch) x = rng.normal();
    train::InfoNceResult res = train::info_nce(t, ch, B, d, 0.07);
    for (int probe = 0; probe < 25; ++probe) {
      bool text_side = rng.uniform() < 0.5;
      std::vector<double>& target = text_side ? t : ch;
      const std::vector<double>& grad = text_side ? res.grad_text : res.grad_chart;
      size_t k = static_cast<size_t>(rng.uniform_int(0, B * d - 1));
      double orig = target[k];
      target[k] = orig + eps;
      double lp = train::info_nce(t, ch, B, d, 0.07).loss;
      target[k] = orig - eps;
      double lm = train::info_nce(t, ch, B, d, 0.07).loss;
      target[k] = orig;
      double numeric = (lp - lm) / (2 * eps);
      double rel = std::fabs(grad[k] - numeric) /
                   std::max({std::fabs(grad[k]), std::fabs(numeric), 1e-12});
      worst = std::max(worst, rel);
    }
  }
  char buf[80];
  std::snprintf(buf, sizeof(buf), "max relative error %.3g", worst);
  c.note(buf);
  c.require(worst <= 1e-4, "finite-difference agreement above 1e-4");

  for (int b : {2, 4, 8}) {
    std::vector<double> row(12, 0.0);
    row[2] = 0.6;
    row[7] = 0.8;
    std::vector<double> batch;
    for (int i = 0; i < b; ++i) batch.insert(batch.end(), row.begin(), row.end());
    double loss = train::info_nce(batch, batch, b, 12, 0.07).loss;
    c.require(std::fabs(loss - std::log(static_cast<double>(b))) <= 1e-9,
              "identical batch loss != ln " + std::to_string(b));
  }
  double dt = secs(t0, Clock::now());
  c.require(dt < 30.0, "runtime exceeds 30s");
  return c.ok;
}

bool criterion6_training_efficacy(Check& c) {
  auto t0 = Clock::now();
  Fixture& fx = fixture();
  c.require(fx.charts.size() == 2000, "corpus size 2000");
  size_t n_groups = fx.groups.size();
  c.require(n_groups >= 150, "benchmark has only " + std::to_string(n_groups) + " groups");
  c.require(!fx.queries.empty(), "no accepted queries");

  for (uint64_t seed : kTrainSeeds) {
    train::TrainConfig cfg;
    cfg.seed = seed;
    enc::DualEncoderModel untrained = enc::DualEncoderModel::random_init(
        cfg.features.text_buckets, cfg.features.chart_dim(), cfg.embed_dim, cfg.tau,
        sub_seed(seed, "init"));
    double before = r_at_10(fx, untrained, fx.inputs_resize);

    enc::DualEncoderModel trained =
        train_full(fx, seed, fx.inputs_resize, enc::PreprocessKind::direct_resize);
    double after = r_at_10(fx, trained, fx.inputs_resize);
    fx.resize_models.emplace(seed, std::move(trained));

    char buf[140];
    std::snprintf(buf, sizeof(buf), "seed %llu: R@10 %.4f -> %.4f (gain %.1f pts)",
                  static_cast<unsigned long long>(seed), before, after,
                  (after - before) * 100.0);
    c.note(buf);
    c.require(after - before >= 0.30, "gain below 30 points for seed " + std::to_string(seed));
  }
  double dt = secs(t0, Clock::now()) + fx.build_seconds;
  c.require(dt <= 600.0, "runtime exceeds 10 min");
  return c.ok;
}

bool criterion7_ablation_direction(Check& c) {
  auto t0 = Clock::now();
  Fixture& fx = fixture();
  int seeds_ok = 0;
  for (uint64_t seed : kTrainSeeds) {
    eval::AblationConfig ac;
    ac.base.seed = seed;
    eval::AblationTable table = eval::run_ablation(fx.charts, fx.insights, fx.queries, ac);
    if (table.rows.size() != 8) {
      c.require(false, "ablation did not produce 8 rows");
      return false;
    }
    double full = table.rows[7].run.combined.overall;
    double max_single = 0.0;
    for (size_t i = 1; i <= 3; ++i)
      max_single = std::max(max_single, table.rows[i].run.combined.overall);
    bool direction = full >= max_single;
    char buf[140];
    std::snprintf(buf, sizeof(buf), "seed %llu: full %.4f vs best single %.4f (%s)",
                  static_cast<unsigned long long>(seed), full, max_single,
                  direction ? "ok" : "reversed");
    c.note(buf);
    if (direction) ++seeds_ok;
  }
  c.require(seeds_ok >= 2, "direction held for " + std::to_string(seeds_ok) + "/3 seeds");
  double dt = secs(t0, Clock::now());
  c.require(dt <= 1800.0, "runtime exceeds 30 min");
  return c.ok;
}

bool criterion8_preprocess(Check& c) {
  Fixture& fx = fixture();

  // (a) deterministic anchor rule on the default 800x500 layout
  size_t crop_removes_y = 0, resize_keeps_all = 0;
  for (const auto& spec : fx.charts) {
    synth::RenderGeometry g = synth::render_geometry(spec);
    auto crop = enc::preprocessed_anchors(spec, {enc::PreprocessKind::center_crop, 512});
    auto resize = enc::preprocessed_anchors(spec, {enc::PreprocessKind::direct_resize, 512});
    bool no_y = true;
    for (const auto& a : crop)
      if (a.role == synth::AnchorRole::y_label) no_y = false;
    if (no_y) ++crop_removes_y;
    if (resize.size() == g.texts.size()) ++resize_keeps_all;
  }
  c.require(crop_removes_y == fx.charts.size(),
            "crop kept a y-axis name on " +
                std::to_string(fx.charts.size() - crop_removes_y) + " charts");
  c.require(resize_keeps_all == fx.charts.size(),
            "resize dropped anchors on " +
                std::to_string(fx.charts.size() - resize_keeps_all) + " charts");

  // (b) directional: resize-trained vs crop-trained R@10
  int seeds_ok = 0;
  for (uint64_t seed : kTrainSeeds) {
    auto it = fx.resize_models.find(seed);
    enc::DualEncoderModel resize_model =
        it != fx.resize_models.end()
            ? it->second
            : train_full(fx, seed, fx.inputs_resize, enc::PreprocessKind::direct_resize);
    enc::DualEncoderModel crop_model =
        train_full(fx, seed, fx.inputs_crop, enc::PreprocessKind::center_crop);

    double r_resize = r_at_10(fx, resize_model, fx.inputs_resize);
    double r_crop = r_at_10(fx, crop_model, fx.inputs_crop);
    char buf[120];
    std::snprintf(buf, sizeof(buf), "seed %llu: resize %.4f vs crop %.4f",
                  static_cast<unsigned long long>(seed), r_resize, r_crop);
    c.note(buf);
    if (r_resize >= r_crop) ++seeds_ok;
  }
  c.require(seeds_ok >= 2, "resize >= crop held for " + std::to_string(seeds_ok) + "/3 seeds");
  return c.ok;
}

bool criterion9_pipeline(Check& c) {
  auto t0 = Clock::now();
  fs::path base = fs::temp_directory_path() / "csem_acceptance_pipeline";
  fs::remove_all(base);
  fs::create_directories(base);

  auto run = [&](const std::string& name) {
    pipe::PipelineConfig cfg;
    cfg.out_dir = (base / name).string();
    cfg.tables = 200;
    pipe::apply_seed(cfg, 7);
    pipe::stage_all(cfg);
    return cfg;
  };
  pipe::PipelineConfig cfg1 = run("run1");
  run("run2");

  Corpus corpus = load_corpus(cfg1.out_dir);
  c.require(corpus.insights.size() == 3 * corpus.charts.size(), "insights != 3 x charts");

  auto groups = load_groups(pipe::groups_path(cfg1));
  bool groups_ok = !groups.empty();
  for (const auto& g : groups) {
    if (g.distractor_ids.size() != 4) groups_ok = false;
    for (double s : g.anchor_similarities)
      if (s < 0.90) groups_ok = false;
  }
  c.require(groups_ok, "group invariant failed");

  auto queries = load_queries(pipe::queries_path(cfg1));
  bool queries_ok = !queries.empty();
  for (const auto& q : queries) {
    if (q.text.find(',') != std::string::npos) queries_ok = false;
    size_t wc = word_count(q.text);
    if (wc < 10 || wc > 15) queries_ok = false;
  }
  c.require(queries_ok, "query shape invariant failed");

  size_t files = 0;
  bool identical = true;
  for (auto& e : fs::recursive_directory_iterator(base / "run1")) {
    if (!e.is_regular_file()) continue;
    ++files;
    fs::path rel = fs::relative(e.path(), base / "run1");
    std::ifstream f1(e.path(), std::ios::binary);
    std::ifstream f2(base / "run2" / rel, std::ios::binary);
    if (!f2) {
      identical = false;
      break;
    }
    std::ostringstream b1, b2;
    b1 << f1.rdbuf();
    b2 << f2.rdbuf();
    if (b1.str() != b2.str()) {
      identical = false;
      c.note("first differing file: " + rel.string());
      break;
    }
  }
  c.require(identical, "output trees differ between runs");
  char buf[120];
  std::snprintf(buf, sizeof(buf), "%zu charts, %zu queries, %zu files", corpus.charts.size(),
                queries.size(), files);
  c.note(buf);

  fs::remove_all(base);
  double dt = secs(t0, Clock::now());
  std::snprintf(buf, sizeof(buf), "two runs in %.1fs", dt);
  c.note(buf);
  c.require(dt <= 300.0, "runtime exceeds 5 min");
  return c.ok;
}

bool criterion10_consensus(Check& c) {
  auto record = [](int yes) {
    bench::VoteRecord r;
    r.query_id = "q";
    r.min_agree = 5;
    for (int i = 0; i < 9; ++i) r.votes.push_back(i < yes);
    return r;
  };
  c.require(bench::validate_consensus(record(4)) == bench::ConsensusResult::rejected,
            "4/9 must be rejected");
  c.require(bench::validate_consensus(record(5)) == bench::ConsensusResult::accepted,
            "5/9 must be accepted");
  c.require(bench::validate_consensus(record(6)) == bench::ConsensusResult::accepted,
            "6/9 must be accepted");
  return c.ok;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    std::function<bool(Check&)> fn;
  };
  const std::vector<Entry> entries = {
      {1, "metric oracle", criterion1_metric_oracle},
      {2, "Table-5 Overall fixture", criterion2_table5_fixture},
      {3, "grouping vs brute force", criterion3_grouping_oracle},
      {4, "search vs full sort + batch latency", criterion4_search_oracle},
      {5, "InfoNCE gradient check", criterion5_gradient},
      {6, "training efficacy", criterion6_training_efficacy},
      {7, "insight-combination direction", criterion7_ablation_direction},
      {8, "preprocessing direction", criterion8_preprocess},
      {9, "pipeline determinism and invariants", criterion9_pipeline},
      {10, "consensus rule", criterion10_consensus},
  };

  int failed = 0;
  for (const auto& e : entries) {
    Check check;
    auto t0 = Clock::now();
    bool ok = false;
    try {
      ok = e.fn(check);
    } catch (const std::exception& ex) {
      check.require(false, std::string("exception: ") + ex.what());
    }
    double dt = secs(t0, Clock::now());
    std::printf("[%s] criterion %2d: %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", e.id, e.name,
                dt, check.msg.tellp() > 0 ? " - " : "", check.msg.str().c_str());
    std::fflush(stdout);
    if (!ok) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(entries.size()) - failed,
              entries.size());
  return failed;
}
