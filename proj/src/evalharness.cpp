#include "csem/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "csem/chartsynth.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace csem::eval {

void MetricConfig::validate() const {
  if (k_list.empty()) throw ValidationError("metric k_list must be non-empty");
  for (size_t i = 0; i < k_list.size(); ++i) {
    if (k_list[i] < 1) throw ValidationError("metric k values must be >= 1");
    if (i > 0 && k_list[i] <= k_list[i - 1])
      throw ValidationError("metric k_list must be sorted ascending");
  }
  if (k_rank < 1) throw ValidationError("k_rank must be >= 1");
}

std::optional<int> rank_of_target(const RankedList& ranked, const std::string& target_id) {
  for (size_t i = 0; i < ranked.entries.size(); ++i)
    if (ranked.entries[i].chart_id == target_id) return static_cast<int>(i) + 1;
  return std::nullopt;
}

double recall_at_k(std::optional<int> rank, int k) {
  return rank && *rank <= k ? 1.0 : 0.0;
}

double mrr_contrib(std::optional<int> rank, int k) {
  return rank && *rank <= k ? 1.0 / static_cast<double>(*rank) : 0.0;
}

double ndcg_contrib(std::optional<int> rank, int k) {
  return rank && *rank <= k ? 1.0 / std::log2(static_cast<double>(*rank) + 1.0) : 0.0;
}

double overall_of_six(const std::array<double, 6>& six) {
  double s = 0.0;
  for (double v : six) s += v;
  return s / 6.0;
}

EvalReport report_from_ranks(
    const std::vector<std::pair<std::string, std::optional<int>>>& ranks,
    const MetricConfig& cfg, const std::string& tag) {
  cfg.validate();
  EvalReport rep;
  rep.config_tag = tag;
  std::vector<int> ks = cfg.k_list;
  if (std::find(ks.begin(), ks.end(), cfg.k_rank) == ks.end()) ks.push_back(cfg.k_rank);

  const double n = ranks.empty() ? 1.0 : static_cast<double>(ranks.size());
  for (int k : ks) rep.r_at[k] = 0.0;
  for (const auto& [qid, rank] : ranks) {
    rep.per_query_rank[qid] = rank;
    for (int k : ks) rep.r_at[k] += recall_at_k(rank, k);
    rep.mrr_at_10 += mrr_contrib(rank, cfg.k_rank);
    rep.ndcg_at_10 += ndcg_contrib(rank, cfg.k_rank);
  }
  for (int k : ks) rep.r_at[k] /= n;
  rep.mrr_at_10 /= n;
  rep.ndcg_at_10 /= n;
  rep.overall = (rep.r_at[cfg.k_rank] + rep.mrr_at_10 + rep.ndcg_at_10) / 3.0;
  return rep;
}

namespace {

EvalRun runs_from_ranked(const std::vector<TextQuery>& queries,
                         const std::vector<RankedList>& ranked, const MetricConfig& cfg,
                         const std::string& tag) {
  std::vector<std::pair<std::string, std::optional<int>>> precise, fuzzy, all;
  for (size_t i = 0; i < queries.size(); ++i) {
    auto rank = rank_of_target(ranked[i], queries[i].target_chart_id);
    all.push_back({queries[i].id, rank});
    if (queries[i].kind == QueryKind::precise)
      precise.push_back({queries[i].id, rank});
    else
      fuzzy.push_back({queries[i].id, rank});
  }
  EvalRun run;
  run.precise = report_from_ranks(precise, cfg, tag.empty() ? "precise" : tag + ":precise");
  run.fuzzy = report_from_ranks(fuzzy, cfg, tag.empty() ? "fuzzy" : tag + ":fuzzy");
  run.combined = report_from_ranks(all, cfg, tag.empty() ? "combined" : tag + ":combined");
  if (!precise.empty() && !fuzzy.empty()) {
    run.combined.overall = overall_of_six(
        {run.precise.r_at.at(cfg.k_rank), run.precise.mrr_at_10, run.precise.ndcg_at_10,
         run.fuzzy.r_at.at(cfg.k_rank), run.fuzzy.mrr_at_10, run.fuzzy.ndcg_at_10});
  }
  return run;
}

}  // namespace

EvalRun evaluate(const retr::VectorIndex& index, const std::vector<TextQuery>& queries,
                 const enc::DualEncoderModel& model, const MetricConfig& cfg,
                 const std::string& tag) {
  cfg.validate();
  std::set<std::string> in_index(index.ids.begin(), index.ids.end());
  std::string missing;
  for (const auto& q : queries)
    if (!in_index.count(q.target_chart_id)) missing += (missing.empty() ? "" : ", ") + q.id;
  if (!missing.empty())
    throw ValidationError("targets missing from index for queries: " + missing);

  int k_max = cfg.k_rank;
  for (int k : cfg.k_list) k_max = std::max(k_max, k);

  std::vector<std::pair<std::string, EmbeddingVector>> qvecs(queries.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (size_t i = 0; i < queries.size(); ++i)
    qvecs[i] = {queries[i].id, enc::embed_text(model, queries[i].text)};

  std::vector<RankedList> ranked = retr::batch_search(index, qvecs, k_max);
  return runs_from_ranked(queries, ranked, cfg, tag);
}

retr::VectorIndex index_from_inputs(const train::ChartInputMap& inputs,
                                    const enc::DualEncoderModel& model) {
  std::vector<std::pair<std::string, EmbeddingVector>> entries;
  entries.reserve(inputs.size());
  for (const auto& [id, x] : inputs) {
    EmbeddingVector v;
    v.dim = model.d;
    v.values = enc::project(model.w_chart, model.d, x);
    v.normalize();
    entries.push_back({id, std::move(v)});
  }
  return retr::build_index(entries);
}

// -------------------------------------------------------------- ablation

AblationTable run_ablation(const std::vector<ChartSpec>& charts,
                           const std::vector<Insight>& insights,
                           const std::vector<TextQuery>& queries,
                           const AblationConfig& cfg) {
  cfg.base.validate();
  cfg.metrics.validate();

  using L = InsightLevel;
  const std::vector<std::set<L>> level_sets = {
      {},                                  // untrained baseline
      {L::visual},
      {L::statistics},
      {L::task},
      {L::visual, L::statistics},
      {L::visual, L::task},
      {L::statistics, L::task},
      {L::visual, L::statistics, L::task},
  };

  // chart tower inputs are model-independent; compute once
  train::ChartInputMap inputs =
      train::compute_chart_inputs(charts, cfg.base.preprocess, cfg.base.features);

  AblationTable table;
  for (size_t row = 0; row < level_sets.size(); ++row) {
    AblationRow r;
    r.levels = level_sets[row];
    r.untrained = level_sets[row].empty();

    enc::DualEncoderModel model;
    if (r.untrained) {
      model = enc::DualEncoderModel::random_init(
          cfg.base.features.text_buckets, cfg.base.features.chart_dim(), cfg.base.embed_dim,
          cfg.base.tau, sub_seed(cfg.base.seed, "init"));
    } else {
      train::TrainConfig row_cfg = cfg.base;
      row_cfg.levels = r.levels;
      std::string row_name;
      for (L l : r.levels) row_name += to_string(l) + "+";
      row_cfg.seed = sub_seed(cfg.base.seed, "ablation:" + row_name);
      row_cfg.checkpoint_dir.clear();
      auto pairs = train::build_pairs(charts, insights, r.levels);
      model = train::train_on_inputs(pairs.pairs, inputs, row_cfg).model;
    }

    retr::VectorIndex index = index_from_inputs(inputs, model);
    r.run = evaluate(index, queries, model, cfg.metrics);
    table.rows.push_back(std::move(r));
  }
  return table;
}

// ---------------------------------------------------------- OCR baseline

EvalRun ocr_baseline(const std::vector<ChartSpec>& charts,
                     const std::vector<TextQuery>& queries,
                     const enc::DualEncoderModel& model, const MetricConfig& cfg) {
  cfg.validate();
  std::vector<std::pair<std::string, EmbeddingVector>> entries(charts.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (size_t i = 0; i < charts.size(); ++i) {
    synth::RenderGeometry g = synth::render_geometry(charts[i]);
    std::string ocr;
    for (const auto& t : g.texts) {
      if (!ocr.empty()) ocr.push_back(' ');
      ocr += t.text;
    }
    entries[i] = {charts[i].id, enc::embed_text(model, ocr)};
  }
  retr::VectorIndex index = retr::build_index(entries);
  EvalRun run = evaluate(index, queries, model, cfg, "text_to_ocr");
  return run;
}

// --------------------------------------------------- preprocess comparison

PreprocessComparison compare_preprocess(const std::vector<ChartSpec>& charts,
                                        const std::vector<Insight>& insights,
                                        const std::vector<TextQuery>& queries,
                                        const train::TrainConfig& base,
                                        const MetricConfig& metrics) {
  PreprocessComparison out;
  EvalRun* runs[2] = {&out.resize, &out.crop};
  enc::PreprocessKind kinds[2] = {enc::PreprocessKind::direct_resize,
                                  enc::PreprocessKind::center_crop};
  for (int m = 0; m < 2; ++m) {
    train::TrainConfig cfg = base;
    cfg.preprocess.kind = kinds[m];
    train::ChartInputMap inputs =
        train::compute_chart_inputs(charts, cfg.preprocess, cfg.features);
    auto pairs = train::build_pairs(charts, insights, cfg.levels);
    enc::DualEncoderModel model = train::train_on_inputs(pairs.pairs, inputs, cfg).model;
    retr::VectorIndex index = index_from_inputs(inputs, model);
    *runs[m] = evaluate(index, queries, model, metrics,
                        enc::to_string(kinds[m]));
  }

  auto add_delta = [&](const std::string& name, double rz, double cr) {
    char d[32];
    std::snprintf(d, sizeof(d), "%+.2f", (rz - cr) * 100.0);
    out.delta_rows.push_back({name, format_pct(rz), format_pct(cr), d});
  };
  int kr = metrics.k_rank;
  add_delta("precise R@" + std::to_string(kr), out.resize.precise.r_at.at(kr),
            out.crop.precise.r_at.at(kr));
  add_delta("precise MRR@" + std::to_string(kr), out.resize.precise.mrr_at_10,
            out.crop.precise.mrr_at_10);
  add_delta("precise NDCG@" + std::to_string(kr), out.resize.precise.ndcg_at_10,
            out.crop.precise.ndcg_at_10);
  add_delta("fuzzy R@" + std::to_string(kr), out.resize.fuzzy.r_at.at(kr),
            out.crop.fuzzy.r_at.at(kr));
  add_delta("fuzzy MRR@" + std::to_string(kr), out.resize.fuzzy.mrr_at_10,
            out.crop.fuzzy.mrr_at_10);
  add_delta("fuzzy NDCG@" + std::to_string(kr), out.resize.fuzzy.ndcg_at_10,
            out.crop.fuzzy.ndcg_at_10);
  add_delta("combined R@" + std::to_string(kr), out.resize.combined.r_at.at(kr),
            out.crop.combined.r_at.at(kr));
  return out;
}

// -------------------------------------------------------------- rendering

namespace {

void render_report_row(std::ostringstream& os, const EvalReport& rep,
                       const MetricConfig& cfg, const std::string& name, bool csv) {
  const char* sep = csv ? "," : " | ";
  os << (csv ? "" : "| ") << name;
  for (int k : cfg.k_list) os << sep << format_pct(rep.r_at.at(k));
  os << sep << format_pct(rep.mrr_at_10) << sep << format_pct(rep.ndcg_at_10) << sep
     << format_pct(rep.overall) << (csv ? "\n" : " |\n");
}

std::string header_cells(const MetricConfig& cfg, bool csv) {
  std::ostringstream os;
  const char* sep = csv ? "," : " | ";
  os << (csv ? "queries" : "| queries");
  for (int k : cfg.k_list) os << sep << "R@" << k;
  os << sep << "MRR@" << cfg.k_rank << sep << "NDCG@" << cfg.k_rank << sep << "Overall"
     << (csv ? "\n" : " |\n");
  return os.str();
}

}  // namespace

std::string render_run_markdown(const EvalRun& run, const MetricConfig& cfg) {
  std::ostringstream os;
  os << header_cells(cfg, false);
  os << "|---";
  for (size_t i = 0; i < cfg.k_list.size() + 3; ++i) os << "|---";
  os << "|\n";
  render_report_row(os, run.precise, cfg, "precise", false);
  render_report_row(os, run.fuzzy, cfg, "fuzzy", false);
  render_report_row(os, run.combined, cfg, "combined", false);
  return os.str();
}

std::string render_run_csv(const EvalRun& run, const MetricConfig& cfg) {
  std::ostringstream os;
  os << header_cells(cfg, true);
  render_report_row(os, run.precise, cfg, "precise", true);
  render_report_row(os, run.fuzzy, cfg, "fuzzy", true);
  render_report_row(os, run.combined, cfg, "combined", true);
  return os.str();
}

namespace {

std::string ablation_cells(const AblationRow& r, const MetricConfig& cfg, bool csv) {
  const char* sep = csv ? "," : " | ";
  const char* mark = csv ? "yes" : "✓";
  std::ostringstream os;
  auto has = [&](InsightLevel l) { return r.levels.count(l) ? mark : ""; };
  os << (csv ? "" : "| ") << has(InsightLevel::visual) << sep
     << has(InsightLevel::statistics) << sep << has(InsightLevel::task);
  int kr = cfg.k_rank;
  for (const EvalReport* rep : {&r.run.precise, &r.run.fuzzy})
    os << sep << format_pct(rep->r_at.at(kr)) << sep << format_pct(rep->mrr_at_10) << sep
       << format_pct(rep->ndcg_at_10);
  os << sep << format_pct(r.run.combined.overall) << (csv ? "\n" : " |\n");
  return os.str();
}

std::string ablation_header(const MetricConfig& cfg, bool csv) {
  const char* sep = csv ? "," : " | ";
  std::ostringstream os;
  int kr = cfg.k_rank;
  os << (csv ? "" : "| ") << "Visual" << sep << "Statistics" << sep << "Task";
  for (const char* kind : {"P", "F"})
    os << sep << kind << "-R@" << kr << sep << kind << "-MRR@" << kr << sep << kind
       << "-NDCG@" << kr;
  os << sep << "Overall" << (csv ? "\n" : " |\n");
  return os.str();
}

}  // namespace

std::string render_ablation_markdown(const AblationTable& table, const MetricConfig& cfg) {
  std::ostringstream os;
  os << ablation_header(cfg, false);
  os << "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : table.rows) os << ablation_cells(r, cfg, false);
  return os.str();
}

std::string render_ablation_csv(const AblationTable& table, const MetricConfig& cfg) {
  std::ostringstream os;
  os << ablation_header(cfg, true);
  for (const auto& r : table.rows) os << ablation_cells(r, cfg, true);
  return os.str();
}

}  // namespace csem::eval
