#include "csem/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "csem/statinsight.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;

namespace csem::pipe {

void PipelineConfig::validate() const {
  if (tables < 1) throw ValidationError("tables must be >= 1");
  if (style_variants < 1) throw ValidationError("style_variants must be >= 1");
  grouping.validate();
  train.validate();
  metrics.validate();
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::set<InsightLevel> parse_levels(const std::string& s) {
  std::set<InsightLevel> out;
  std::istringstream iss(s);
  std::string tok;
  while (std::getline(iss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.insert(insight_level_from(tok));
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::istringstream iss(s);
  std::string tok;
  while (std::getline(iss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(std::stoi(tok));
  }
  return out;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ValidationError("bad boolean config value: '" + s + "'");
}

}  // namespace

PipelineConfig parse_config_text(const std::string& text) {
  PipelineConfig cfg;
  std::istringstream iss(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(iss, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == '[') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) + " has no '='");
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    if (val.size() >= 2 && val.front() == '"' && val.back() == '"')
      val = val.substr(1, val.size() - 2);

    try {
      if (key == "out_dir") cfg.out_dir = val;
      else if (key == "seed") cfg.seed = std::stoull(val);
      else if (key == "tables") cfg.tables = std::stoi(val);
      else if (key == "max_charts_per_table") cfg.max_charts_per_table = std::stoi(val);
      else if (key == "style_variants") cfg.style_variants = std::stoi(val);
      else if (key == "variant_jitter") cfg.variant_jitter = std::stod(val);
      else if (key == "target_charts") cfg.target_charts = std::stoi(val);
      else if (key == "jobs") cfg.jobs = std::stoi(val);
      else if (key == "group.threshold") cfg.grouping.threshold = std::stod(val);
      else if (key == "group.size") cfg.grouping.group_size = std::stoi(val);
      else if (key == "group.distractor_reuse") cfg.grouping.distractor_reuse = parse_bool(val);
      else if (key == "train.levels") cfg.train.levels = parse_levels(val);
      else if (key == "train.batch_size") cfg.train.batch_size = std::stoi(val);
      else if (key == "train.epochs") cfg.train.epochs = std::stoi(val);
      else if (key == "train.learning_rate") cfg.train.learning_rate = std::stod(val);
      else if (key == "train.momentum") cfg.train.momentum = std::stod(val);
      else if (key == "train.tau") cfg.train.tau = std::stod(val);
      else if (key == "train.embed_dim") cfg.train.embed_dim = std::stoi(val);
      else if (key == "train.preprocess")
        cfg.train.preprocess.kind = enc::preprocess_kind_from(val);
      else if (key == "eval.k_list") cfg.metrics.k_list = parse_int_list(val);
      else if (key == "eval.k_rank") cfg.metrics.k_rank = std::stoi(val);
      else if (key == "votes.raters") cfg.votes.n_raters = std::stoi(val);
      else if (key == "votes.min_agree") cfg.votes.min_agree = std::stoi(val);
      else if (key == "votes.p_true") cfg.votes.p_true = std::stod(val);
      else if (key == "votes.p_false") cfg.votes.p_false = std::stod(val);
      else if (key == "votes.p_fuzzy") cfg.votes.p_fuzzy = std::stod(val);
      else if (key == "llm.url") cfg.llm.url = val;
      else if (key == "llm.model") cfg.llm.model = val;
      else if (key == "llm.timeout") cfg.llm.timeout_sec = std::stod(val);
      else if (key == "embed.url") cfg.embed.url = val;
      else if (key == "embed.dim") cfg.remote_embed_dim = std::stoi(val);
      else throw ValidationError("unknown config key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw ValidationError("bad value for config key '" + key + "': '" + val + "'");
    }
  }
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  PipelineConfig cfg;
  if (!path.empty()) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    cfg = parse_config_text(buf.str());
  }
  apply_env_overrides(cfg);
  return cfg;
}

void apply_env_overrides(PipelineConfig& cfg) {
  if (const char* v = std::getenv("CSEM_LLM_URL")) cfg.llm.url = v;
  if (const char* v = std::getenv("CSEM_LLM_MODEL")) cfg.llm.model = v;
  if (const char* v = std::getenv("CSEM_EMBED_URL")) cfg.embed.url = v;
  if (const char* v = std::getenv("CSEM_EMBED_DIM")) cfg.remote_embed_dim = std::atoi(v);
}

void apply_seed(PipelineConfig& cfg, uint64_t seed) {
  cfg.seed = seed;
  cfg.train.seed = sub_seed(seed, "train");
}

std::string charts_path(const PipelineConfig& c) {
  return (fs::path(c.out_dir) / "charts.jsonl").string();
}
std::string insights_path(const PipelineConfig& c) {
  return (fs::path(c.out_dir) / "insights.jsonl").string();
}
std::string model_path(const PipelineConfig& c) {
  return (fs::path(c.out_dir) / "model.bin").string();
}
std::string trainlog_path(const PipelineConfig& c) {
  return (fs::path(c.out_dir) / "trainlog.csv").string();
}
std::string embeddings_path(const PipelineConfig& c) {
  return (fs::path(c.out_dir) / "embeddings.bin").string();
}
std::string groups_path(const PipelineConfig& c) {
  return (fs::path(c.out_dir) / "groups.jsonl").string();
}
std::string queries_path(const PipelineConfig& c) {
  return (fs::path(c.out_dir) / "queries.jsonl").string();
}
std::string votes_path(const PipelineConfig& c) {
  return (fs::path(c.out_dir) / "votes.jsonl").string();
}
std::string reports_dir(const PipelineConfig& c) {
  return (fs::path(c.out_dir) / "reports").string();
}

namespace {

void set_jobs(const PipelineConfig& cfg) {
#ifdef _OPENMP
  if (cfg.jobs > 0) omp_set_num_threads(cfg.jobs);
#else
  (void)cfg;
#endif
}

Corpus load_full_corpus(const PipelineConfig& cfg) {
  return load_corpus(cfg.out_dir);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << text;
  if (!f) throw IoError("write failure: " + path);
}

synth::CorpusConfig corpus_config(const PipelineConfig& cfg) {
  synth::CorpusConfig cc;
  cc.seed = sub_seed(cfg.seed, "synth");
  cc.n_tables = cfg.tables;
  cc.max_charts_per_table = cfg.max_charts_per_table;
  cc.style_variants = cfg.style_variants;
  cc.variant_jitter = cfg.variant_jitter;
  cc.target_charts = cfg.target_charts;
  return cc;
}

const enc::EndpointConfig* llm_or_null(const PipelineConfig& cfg) {
  return cfg.llm.url.empty() ? nullptr : &cfg.llm;
}

}  // namespace

void stage_synth(const PipelineConfig& cfg) {
  cfg.validate();
  set_jobs(cfg);
  std::vector<ChartSpec> charts = synth::build_corpus(corpus_config(cfg));
  std::map<std::string, std::string> svgs;
  std::vector<std::string> rendered(charts.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (size_t i = 0; i < charts.size(); ++i) rendered[i] = synth::render_svg(charts[i]);
  for (size_t i = 0; i < charts.size(); ++i) svgs[charts[i].id] = std::move(rendered[i]);
  save_corpus(charts, {}, cfg.out_dir, &svgs);
  std::cout << "synth: " << charts.size() << " charts -> " << charts_path(cfg) << "\n";
}

void stage_insights(const PipelineConfig& cfg) {
  set_jobs(cfg);
  Corpus corpus = load_full_corpus(cfg);
  stat::SynthesisResult res = stat::synthesize_all(corpus.charts, llm_or_null(cfg));
  if (!res.skipped.empty())
    std::cout << "insights: skipped " << res.skipped.size() << " charts\n";
  save_corpus(corpus.charts, res.insights, cfg.out_dir);
  std::cout << "insights: " << res.insights.size() << " insights -> "
            << insights_path(cfg) << "\n";
}

void stage_train(const PipelineConfig& cfg) {
  set_jobs(cfg);
  Corpus corpus = load_full_corpus(cfg);
  train::TrainConfig tc = cfg.train;
  tc.seed = sub_seed(cfg.seed, "train");
  tc.checkpoint_dir = (fs::path(cfg.out_dir) / "checkpoints").string();
  train::TrainResult res = train::train(corpus.charts, corpus.insights, tc);
  train::save_checkpoint(res.model, model_path(cfg));
  train::save_trainlog(res.log, trainlog_path(cfg));
  std::cout << "train: " << res.log.epoch_mean_loss.size() << " epochs, final loss "
            << (res.log.epoch_mean_loss.empty() ? 0.0 : res.log.epoch_mean_loss.back())
            << " -> " << model_path(cfg) << "\n";
}

void stage_embed(const PipelineConfig& cfg) {
  set_jobs(cfg);
  Corpus corpus = load_full_corpus(cfg);
  std::vector<std::pair<std::string, EmbeddingVector>> entries(corpus.charts.size());
  if (!cfg.embed.url.empty()) {
    std::vector<enc::EmbedInput> inputs;
    inputs.reserve(corpus.charts.size());
    for (const auto& c : corpus.charts)
      inputs.push_back({"", synth::render_svg(c)});
    std::vector<EmbeddingVector> vecs = enc::remote_embed(inputs, cfg.embed);
    for (size_t i = 0; i < corpus.charts.size(); ++i)
      entries[i] = {corpus.charts[i].id, std::move(vecs[i])};
  } else {
    enc::DualEncoderModel model = train::load_checkpoint(model_path(cfg));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (size_t i = 0; i < corpus.charts.size(); ++i)
      entries[i] = {corpus.charts[i].id,
                    enc::embed_chart(model, corpus.charts[i], cfg.train.preprocess)};
  }
  save_embeddings(embeddings_path(cfg), entries);
  std::cout << "embed: " << entries.size() << " vectors -> " << embeddings_path(cfg) << "\n";
}

void stage_index(const PipelineConfig& cfg) {
  Corpus corpus = load_full_corpus(cfg);
  std::vector<std::string> ids;
  ids.reserve(corpus.charts.size());
  for (const auto& c : corpus.charts) ids.push_back(c.id);
  retr::VectorIndex index = retr::load_index(embeddings_path(cfg), ids);
  std::cout << "index: " << index.size() << " vectors, dim " << index.dim << "\n";
}

void stage_bench_build(const PipelineConfig& cfg) {
  set_jobs(cfg);
  Corpus corpus = load_full_corpus(cfg);
  // fixed grouping encoder: identity projection over the chart features
  std::vector<std::pair<std::string, EmbeddingVector>> vectors(corpus.charts.size());
  enc::PreprocessMode mode;  // direct_resize
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (size_t i = 0; i < corpus.charts.size(); ++i)
    vectors[i] = {corpus.charts[i].id,
                  enc::feature_embedding(corpus.charts[i], mode, cfg.train.features)};
  std::vector<BenchmarkGroup> groups = bench::group_charts(vectors, cfg.grouping);
  save_groups(groups, groups_path(cfg));
  std::cout << "bench-build: " << groups.size() << " candidate groups -> "
            << groups_path(cfg) << "\n";
}

void stage_queries(const PipelineConfig& cfg) {
  set_jobs(cfg);
  Corpus corpus = load_full_corpus(cfg);
  std::map<std::string, const ChartSpec*> by_id;
  for (const auto& c : corpus.charts) by_id[c.id] = &c;

  std::vector<BenchmarkGroup> groups = load_groups(groups_path(cfg));
  std::vector<bool> discriminative(groups.size(), false);
  for (size_t i = 0; i < groups.size(); ++i) {
    auto& g = groups[i];
    auto target_it = by_id.find(g.target_id);
    if (target_it == by_id.end())
      throw ValidationError("group " + g.group_id + " references unknown chart " +
                            g.target_id);
    std::vector<ChartSpec> distractors;
    for (const auto& did : g.distractor_ids) {
      auto it = by_id.find(did);
      if (it == by_id.end())
        throw ValidationError("group " + g.group_id + " references unknown chart " + did);
      distractors.push_back(*it->second);
    }
    bench::QueryGenResult qr =
        bench::gen_queries(g, *target_it->second, distractors, llm_or_null(cfg));
    g.precise_query = qr.precise;
    g.fuzzy_query = qr.fuzzy;
    discriminative[i] = qr.discriminative;
  }

  std::vector<bench::VoteRecord> votes;
  if (fs::exists(votes_path(cfg))) {
    votes = bench::load_votes(votes_path(cfg));
  } else {
    uint64_t vseed = sub_seed(cfg.seed, "votes");
    for (size_t i = 0; i < groups.size(); ++i) {
      votes.push_back(
          bench::simulate_votes(*groups[i].precise_query, discriminative[i], cfg.votes, vseed));
      votes.push_back(
          bench::simulate_votes(*groups[i].fuzzy_query, true, cfg.votes, vseed));
    }
    bench::save_votes(votes, votes_path(cfg));
  }

  bench::AssembleResult res = bench::assemble_benchmark(groups, votes);
  save_groups(res.groups, groups_path(cfg));
  save_queries(res.accepted_queries, queries_path(cfg));
  std::cout << "queries: " << res.accepted_queries.size() << " accepted of "
            << 2 * groups.size() << " -> " << queries_path(cfg) << "\n";
}

void stage_eval(const PipelineConfig& cfg) {
  set_jobs(cfg);
  Corpus corpus = load_full_corpus(cfg);
  std::vector<std::string> ids;
  for (const auto& c : corpus.charts) ids.push_back(c.id);
  retr::VectorIndex index = retr::load_index(embeddings_path(cfg), ids);
  enc::DualEncoderModel model = train::load_checkpoint(model_path(cfg));
  std::vector<TextQuery> queries = load_queries(queries_path(cfg));

  eval::EvalRun run = eval::evaluate(index, queries, model, cfg.metrics, "text_to_chart");
  fs::create_directories(reports_dir(cfg));
  write_text((fs::path(reports_dir(cfg)) / "report.md").string(),
             eval::render_run_markdown(run, cfg.metrics));
  write_text((fs::path(reports_dir(cfg)) / "report.csv").string(),
             eval::render_run_csv(run, cfg.metrics));
  std::cout << "eval: " << queries.size() << " queries, combined R@" << cfg.metrics.k_rank
            << " = " << format_pct(run.combined.r_at.at(cfg.metrics.k_rank)) << " -> "
            << reports_dir(cfg) << "\n";
}

void stage_ablation(const PipelineConfig& cfg) {
  set_jobs(cfg);
  Corpus corpus = load_full_corpus(cfg);
  std::vector<TextQuery> queries = load_queries(queries_path(cfg));
  eval::AblationConfig ac;
  ac.base = cfg.train;
  ac.base.seed = sub_seed(cfg.seed, "train");
  ac.metrics = cfg.metrics;
  eval::AblationTable table = eval::run_ablation(corpus.charts, corpus.insights, queries, ac);
  fs::create_directories(reports_dir(cfg));
  write_text((fs::path(reports_dir(cfg)) / "ablation.md").string(),
             eval::render_ablation_markdown(table, cfg.metrics));
  write_text((fs::path(reports_dir(cfg)) / "ablation.csv").string(),
             eval::render_ablation_csv(table, cfg.metrics));
  std::cout << "ablation: " << table.rows.size() << " rows -> " << reports_dir(cfg) << "\n";
}

void stage_ocr_eval(const PipelineConfig& cfg) {
  set_jobs(cfg);
  Corpus corpus = load_full_corpus(cfg);
  enc::DualEncoderModel model = train::load_checkpoint(model_path(cfg));
  std::vector<TextQuery> queries = load_queries(queries_path(cfg));
  eval::EvalRun run = eval::ocr_baseline(corpus.charts, queries, model, cfg.metrics);
  fs::create_directories(reports_dir(cfg));
  write_text((fs::path(reports_dir(cfg)) / "ocr_report.md").string(),
             eval::render_run_markdown(run, cfg.metrics));
  write_text((fs::path(reports_dir(cfg)) / "ocr_report.csv").string(),
             eval::render_run_csv(run, cfg.metrics));
  std::cout << "ocr-eval: done -> " << reports_dir(cfg) << "\n";
}

void stage_preprocess_compare(const PipelineConfig& cfg) {
  set_jobs(cfg);
  Corpus corpus = load_full_corpus(cfg);
  std::vector<TextQuery> queries = load_queries(queries_path(cfg));
  train::TrainConfig base = cfg.train;
  base.seed = sub_seed(cfg.seed, "train");
  base.checkpoint_dir.clear();
  eval::PreprocessComparison cmp =
      eval::compare_preprocess(corpus.charts, corpus.insights, queries, base, cfg.metrics);
  std::ostringstream md;
  md << "| metric | direct_resize | center_crop | delta |\n|---|---|---|---|\n";
  for (const auto& row : cmp.delta_rows)
    md << "| " << row[0] << " | " << row[1] << " | " << row[2] << " | " << row[3] << " |\n";
  fs::create_directories(reports_dir(cfg));
  write_text((fs::path(reports_dir(cfg)) / "preprocess_compare.md").string(), md.str());
  std::cout << "preprocess-compare: done -> " << reports_dir(cfg) << "\n";
}

void stage_all(const PipelineConfig& cfg) {
  stage_synth(cfg);
  stage_insights(cfg);
  stage_train(cfg);
  stage_embed(cfg);
  stage_index(cfg);
  stage_bench_build(cfg);
  stage_queries(cfg);
  stage_eval(cfg);
}

std::vector<std::string> missing_inputs(const std::string& stage, const PipelineConfig& cfg) {
  std::vector<std::string> need;
  auto corpus = [&] {
    need.push_back(charts_path(cfg));
    need.push_back(insights_path(cfg));
  };
  if (stage == "insights") need.push_back(charts_path(cfg));
  else if (stage == "train") corpus();
  else if (stage == "embed") { corpus(); if (cfg.embed.url.empty()) need.push_back(model_path(cfg)); }
  else if (stage == "index") { corpus(); need.push_back(embeddings_path(cfg)); }
  else if (stage == "bench-build") corpus();
  else if (stage == "queries") { corpus(); need.push_back(groups_path(cfg)); }
  else if (stage == "eval") {
    corpus();
    need.push_back(embeddings_path(cfg));
    need.push_back(model_path(cfg));
    need.push_back(queries_path(cfg));
  } else if (stage == "ablation" || stage == "ocr-eval" || stage == "preprocess-compare") {
    corpus();
    need.push_back(queries_path(cfg));
    if (stage == "ocr-eval") need.push_back(model_path(cfg));
  }
  std::vector<std::string> missing;
  for (const auto& p : need)
    if (!fs::exists(p)) missing.push_back(p);
  return missing;
}

}  // namespace csem::pipe
