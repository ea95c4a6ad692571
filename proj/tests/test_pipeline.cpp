#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "csem/pipeline.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace csem;
using namespace csem::pipe;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

bool trees_equal(const fs::path& a, const fs::path& b) {
  std::vector<std::string> rel_a, rel_b;
  for (auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) rel_a.push_back(fs::relative(e.path(), a).string());
  for (auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) rel_b.push_back(fs::relative(e.path(), b).string());
  std::sort(rel_a.begin(), rel_a.end());
  std::sort(rel_b.begin(), rel_b.end());
  if (rel_a != rel_b) return false;
  for (const auto& rel : rel_a)
    if (slurp(a / rel) != slurp(b / rel)) return false;
  return true;
}

PipelineConfig tiny_config(const std::string& out_dir, uint64_t seed) {
  PipelineConfig cfg;
  cfg.out_dir = out_dir;
  cfg.tables = 5;
  cfg.max_charts_per_table = 2;
  cfg.style_variants = 5;
  cfg.train.epochs = 3;
  cfg.train.batch_size = 8;
  apply_seed(cfg, seed);
  return cfg;
}

}  // namespace

TEST_CASE("config parsing covers keys, quotes, comments, and errors") {
  std::string text =
      "# demo configuration\n"
      "out_dir = \"runs/demo\"\n"
      "seed = 11\n"
      "tables = 42\n"
      "style_variants = 3\n"
      "group.threshold = 0.85\n"
      "train.levels = visual, task\n"
      "train.epochs = 7\n"
      "eval.k_list = 1, 5, 10\n"
      "votes.p_true = 0.8\n";
  PipelineConfig cfg = parse_config_text(text);
  CHECK(cfg.out_dir == "runs/demo");
  CHECK(cfg.seed == 11);
  CHECK(cfg.tables == 42);
  CHECK(cfg.style_variants == 3);
  CHECK(cfg.grouping.threshold == doctest::Approx(0.85));
  CHECK(cfg.train.levels.size() == 2);
  CHECK(cfg.train.levels.count(InsightLevel::task) == 1);
  CHECK(cfg.train.epochs == 7);
  CHECK(cfg.votes.p_true == doctest::Approx(0.8));

  CHECK_THROWS_WITH_AS(parse_config_text("bogus_key = 3\n"), doctest::Contains("bogus_key"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(parse_config_text("tables\n"), doctest::Contains("no '='"),
                       ValidationError);
  CHECK_THROWS_AS(parse_config_text("tables = lots\n"), ValidationError);
}

TEST_CASE("environment variables override endpoint settings") {
  setenv("CSEM_LLM_URL", "http://127.0.0.1:9/llm", 1);
  setenv("CSEM_LLM_MODEL", "test-model", 1);
  setenv("CSEM_EMBED_URL", "http://127.0.0.1:9/embed", 1);
  setenv("CSEM_EMBED_DIM", "256", 1);
  PipelineConfig cfg;
  apply_env_overrides(cfg);
  CHECK(cfg.llm.url == "http://127.0.0.1:9/llm");
  CHECK(cfg.llm.model == "test-model");
  CHECK(cfg.embed.url == "http://127.0.0.1:9/embed");
  CHECK(cfg.remote_embed_dim == 256);
  unsetenv("CSEM_LLM_URL");
  unsetenv("CSEM_LLM_MODEL");
  unsetenv("CSEM_EMBED_URL");
  unsetenv("CSEM_EMBED_DIM");
}

TEST_CASE("full pipeline at toy scale: counts, invariants, determinism") {
  testutil::TempDir dir("pipe");
  std::string out1 = (dir.path() / "run1").string();
  std::string out2 = (dir.path() / "run2").string();

  stage_all(tiny_config(out1, 7));
  stage_all(tiny_config(out2, 7));

  Corpus corpus = load_corpus(out1);
  CHECK(corpus.insights.size() == 3 * corpus.charts.size());
  CHECK(validate_corpus(corpus.charts, corpus.insights).empty());

  // one SVG per chart
  for (const auto& c : corpus.charts)
    CHECK(fs::exists(fs::path(out1) / "svg" / (c.id + ".svg")));

  auto groups = load_groups((fs::path(out1) / "groups.jsonl").string());
  for (const auto& g : groups) {
    CHECK(g.distractor_ids.size() == 4);
    for (double s : g.anchor_similarities) CHECK(s >= 0.90);
  }

  auto queries = load_queries((fs::path(out1) / "queries.jsonl").string());
  CHECK_FALSE(queries.empty());
  for (const auto& q : queries) {
    CHECK(q.text.find(',') == std::string::npos);
    size_t wc = word_count(q.text);
    CHECK(wc >= 10);
    CHECK(wc <= 15);
  }

  CHECK(trees_equal(out1, out2));

  // a different seed changes the corpus
  std::string out3 = (dir.path() / "run3").string();
  stage_all(tiny_config(out3, 8));
  CHECK_FALSE(trees_equal(out1, out3));
}

TEST_CASE("missing inputs are reported per stage") {
  PipelineConfig cfg;
  cfg.out_dir = "/nonexistent/csem_missing";
  auto missing = missing_inputs("eval", cfg);
  CHECK(missing.size() == 5);
  CHECK(missing_inputs("synth", cfg).empty());  // synth needs no inputs
}

TEST_CASE("queries stage reuses an existing votes file") {
  testutil::TempDir dir("votes_reuse");
  PipelineConfig cfg = tiny_config((dir.path() / "out").string(), 9);
  stage_synth(cfg);
  stage_insights(cfg);
  stage_bench_build(cfg);
  stage_queries(cfg);
  std::string votes_first = slurp(votes_path(cfg));
  std::string queries_first = slurp(queries_path(cfg));

  // rerunning with the recorded votes reproduces the same benchmark
  stage_queries(cfg);
  CHECK(slurp(votes_path(cfg)) == votes_first);
  CHECK(slurp(queries_path(cfg)) == queries_first);

  // hand-edited votes flip acceptance
  auto votes = bench::load_votes(votes_path(cfg));
  REQUIRE(!votes.empty());
  for (auto& v : votes) v.votes = std::vector<bool>(v.votes.size(), false);
  bench::save_votes(votes, votes_path(cfg));
  stage_queries(cfg);
  auto queries = load_queries(queries_path(cfg));
  CHECK(queries.empty());
  for (const auto& g : load_groups(groups_path(cfg)))
    CHECK(g.status == GroupStatus::rejected);
}
