#include <algorithm>
#include <cmath>
#include <set>

#include "csem/benchgen.hpp"
#include "csem/reference.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace csem;
using namespace csem::bench;
using testutil::unit_vec;

namespace {

bool same_groups(const std::vector<BenchmarkGroup>& a, const std::vector<BenchmarkGroup>& b,
                 double tol = 1e-9) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].target_id != b[i].target_id) return false;
    if (a[i].distractor_ids != b[i].distractor_ids) return false;
    for (size_t j = 0; j < a[i].anchor_similarities.size(); ++j)
      if (std::fabs(a[i].anchor_similarities[j] - b[i].anchor_similarities[j]) > tol)
        return false;
  }
  return true;
}

std::vector<std::pair<std::string, EmbeddingVector>> random_vectors(Rng& rng, size_t n,
                                                                    int dim) {
  std::vector<std::pair<std::string, EmbeddingVector>> out;
  for (size_t i = 0; i < n; ++i) {
    std::vector<double> v(static_cast<size_t>(dim));
    for (auto& x : v) x = rng.normal();
    char id[24];
    std::snprintf(id, sizeof(id), "c%04zu", i);
    out.push_back({id, unit_vec(std::move(v))});
  }
  return out;
}

ChartSpec line_target() {
  ChartSpec c = testutil::simple_line("c_target");
  return c;  // x = 2018..2022, y_name = revenue
}

std::vector<ChartSpec> line_distractors_diff_y() {
  std::vector<ChartSpec> out;
  for (int i = 0; i < 4; ++i) {
    ChartSpec d = testutil::simple_line("c_d" + std::to_string(i));
    d.y_name = "bookings";
    d.title = "Annual Bookings over Year for Harbor";
    out.push_back(d);
  }
  return out;
}

BenchmarkGroup group_for(const ChartSpec& target, const std::vector<ChartSpec>& ds) {
  BenchmarkGroup g;
  g.group_id = "g_" + target.id;
  g.target_id = target.id;
  for (const auto& d : ds) {
    g.distractor_ids.push_back(d.id);
    g.anchor_similarities.push_back(0.95);
  }
  return g;
}

}  // namespace

TEST_CASE("five copies anchor five groups under distractor reuse") {
  Rng rng(61);
  std::vector<std::pair<std::string, EmbeddingVector>> vectors;
  std::vector<double> base(16, 0.0);
  base[0] = 1.0;
  for (int i = 0; i < 5; ++i)
    vectors.push_back({"copy" + std::to_string(i), unit_vec(base)});
  // far vectors: dominated by other axes, cosine to the copies well below 0.9
  for (int i = 0; i < 20; ++i) {
    std::vector<double> v(16, 0.0);
    v[static_cast<size_t>(1 + i % 15)] = 1.0;
    v[0] = 0.2;
    vectors.push_back({"far" + std::to_string(i), unit_vec(std::move(v))});
  }

  GroupingConfig cfg;
  auto groups = group_charts(vectors, cfg);
  REQUIRE(groups.size() == 5);
  std::set<std::string> anchors;
  for (const auto& g : groups) {
    anchors.insert(g.target_id);
    CHECK(g.target_id.rfind("copy", 0) == 0);
    REQUIRE(g.distractor_ids.size() == 4);
    for (const auto& d : g.distractor_ids) CHECK(d.rfind("copy", 0) == 0);
    for (double s : g.anchor_similarities) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(anchors.size() == 5);  // each chart anchors at most one group

  CHECK(same_groups(groups, ref::group_reference(vectors, cfg)));
}

TEST_CASE("orthogonal vectors form no groups") {
  std::vector<std::pair<std::string, EmbeddingVector>> vectors;
  for (int i = 0; i < 8; ++i) {
    std::vector<double> v(8, 0.0);
    v[static_cast<size_t>(i)] = 1.0;
    vectors.push_back({"e" + std::to_string(i), unit_vec(std::move(v))});
  }
  CHECK(group_charts(vectors, GroupingConfig{}).empty());
}

TEST_CASE("threshold boundary is inclusive at exactly 0.90") {
  // anchor at e1; four companions whose dot with the anchor is the 0.9
  // literal itself (no renormalization so the comparison is exact)
  std::vector<std::pair<std::string, EmbeddingVector>> vectors;
  vectors.push_back({"a_anchor", unit_vec({1.0, 0.0, 0.0, 0.0, 0.0, 0.0})});
  double s = std::sqrt(1.0 - 0.81);
  for (int i = 0; i < 4; ++i) {
    EmbeddingVector v;
    v.dim = 6;
    v.values.assign(6, 0.0);
    v.values[0] = 0.9;
    v.values[static_cast<size_t>(i + 1)] = s;
    CHECK(v.is_unit(1e-9));
    vectors.push_back({"b_comp" + std::to_string(i), v});
  }
  GroupingConfig cfg;
  auto groups = group_charts(vectors, cfg);
  REQUIRE(!groups.empty());
  CHECK(groups[0].target_id == "a_anchor");
  for (double sim : groups[0].anchor_similarities) CHECK(sim >= cfg.threshold);
  CHECK(same_groups(groups, ref::group_reference(vectors, cfg)));
}

TEST_CASE("grouping equals the quadratic reference on random instances") {
  Rng rng(67);
  for (int trial = 0; trial < 12; ++trial) {
    size_t n = static_cast<size_t>(rng.uniform_int(8, 250));
    int dim = static_cast<int>(rng.uniform_int(3, 24));
    auto vectors = random_vectors(rng, n, dim);
    // sprinkle near-duplicates so some groups actually form
    for (int d = 0; d < 12 && d + 5 < static_cast<int>(n); d += 5)
      for (int j = 1; j <= 4; ++j)
        vectors[static_cast<size_t>(d + j)].second = vectors[static_cast<size_t>(d)].second;

    GroupingConfig cfg;
    cfg.threshold = rng.uniform(0.5, 0.95);
    cfg.distractor_reuse = trial % 2 == 0;
    auto fast = group_charts(vectors, cfg);
    auto slow = ref::group_reference(vectors, cfg);
    CHECK(same_groups(fast, slow));
    for (const auto& g : fast) CHECK_NOTHROW(validate_group(g, cfg.threshold));
  }
}

TEST_CASE("template precise query uses a sub-range and the differing axis") {
  ChartSpec target = line_target();
  auto ds = line_distractors_diff_y();
  BenchmarkGroup g = group_for(target, ds);
  QueryGenResult qr = gen_queries(g, target, ds);

  CHECK(qr.discriminative);
  const std::string& text = qr.precise.text;
  CHECK(text.find("revenue") != std::string::npos);
  CHECK(text.find(',') == std::string::npos);
  size_t wc = word_count(text);
  CHECK(wc >= 10);
  CHECK(wc <= 15);
  CHECK(text.size() <= 120);

  // the advertised range sits strictly inside the chart's own span
  size_t from = text.find("from ");
  size_t to = text.find(" to ");
  REQUIRE(from != std::string::npos);
  REQUIRE(to != std::string::npos);
  int lo = std::stoi(text.substr(from + 5, 4));
  int hi = std::stoi(text.substr(to + 4, 4));
  CHECK(lo >= 2018);
  CHECK(hi <= 2022);
  CHECK(lo < hi);
  CHECK((lo > 2018 || hi < 2022));

  CHECK(qr.precise.id == "g_c_target_p");
  CHECK(qr.precise.kind == QueryKind::precise);
  CHECK(qr.fuzzy.kind == QueryKind::fuzzy);
}

TEST_CASE("fuzzy query names the chart purpose") {
  ChartSpec target = testutil::simple_pie("c_ptar");
  std::vector<ChartSpec> ds;
  for (int i = 0; i < 4; ++i) ds.push_back(testutil::simple_pie("c_pd" + std::to_string(i)));
  BenchmarkGroup g = group_for(target, ds);
  QueryGenResult qr = gen_queries(g, target, ds);
  bool purpose = qr.fuzzy.text.find("distribution") != std::string::npos ||
                 qr.fuzzy.text.find("proportion") != std::string::npos;
  CHECK(purpose);
  size_t wc = word_count(qr.fuzzy.text);
  CHECK(wc >= 10);
  CHECK(wc <= 15);
  CHECK(qr.fuzzy.text.find(',') == std::string::npos);
}

TEST_CASE("identical target and distractors fall back to the flagged conjunction") {
  ChartSpec target = line_target();
  std::vector<ChartSpec> ds;
  for (int i = 0; i < 4; ++i) {
    ChartSpec d = line_target();
    d.id = "c_same" + std::to_string(i);
    ds.push_back(d);
  }
  BenchmarkGroup g = group_for(target, ds);
  QueryGenResult qr = gen_queries(g, target, ds);
  CHECK_FALSE(qr.discriminative);
  size_t wc = word_count(qr.precise.text);
  CHECK(wc >= 10);
  CHECK(wc <= 15);
}

TEST_CASE("consensus thresholds match the vote rule") {
  auto record = [](int yes, int total, int min_agree) {
    VoteRecord r;
    r.query_id = "q";
    r.min_agree = min_agree;
    for (int i = 0; i < total; ++i) r.votes.push_back(i < yes);
    return r;
  };
  CHECK(validate_consensus(record(6, 9, 5)) == ConsensusResult::accepted);
  CHECK(validate_consensus(record(4, 9, 5)) == ConsensusResult::rejected);
  CHECK(validate_consensus(record(5, 9, 5)) == ConsensusResult::accepted);  // inclusive
  CHECK_THROWS_AS(validate_consensus(record(2, 3, 9)), ValidationError);

  // monotone: adding a yes vote never flips accepted to rejected
  Rng rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    int yes = static_cast<int>(rng.uniform_int(0, 8));
    VoteRecord r = record(yes, 9, 5);
    VoteRecord more = record(yes + 1, 9, 5);
    if (validate_consensus(r) == ConsensusResult::accepted)
      CHECK(validate_consensus(more) == ConsensusResult::accepted);
  }
}

TEST_CASE("simulated votes are seeded and respect the rater model") {
  TextQuery q;
  q.id = "q1";
  q.kind = QueryKind::precise;
  q.target_chart_id = "c";
  q.text = "probe";
  VoteSimParams params;
  VoteRecord a = simulate_votes(q, true, params, 9);
  VoteRecord b = simulate_votes(q, true, params, 9);
  CHECK(a.votes == b.votes);
  CHECK(a.votes.size() == 9);
  CHECK(a.min_agree == 5);

  // across many discriminative queries the accept rate is high, and low for
  // non-discriminative ones
  int acc_true = 0, acc_false = 0;
  for (int i = 0; i < 200; ++i) {
    TextQuery qi = q;
    qi.id = "q" + std::to_string(i);
    if (validate_consensus(simulate_votes(qi, true, params, 1)) == ConsensusResult::accepted)
      ++acc_true;
    if (validate_consensus(simulate_votes(qi, false, params, 1)) == ConsensusResult::accepted)
      ++acc_false;
  }
  CHECK(acc_true > 180);
  CHECK(acc_false < 30);
}

TEST_CASE("assemble_benchmark keeps only accepted queries and resolves statuses") {
  std::vector<BenchmarkGroup> groups;
  std::vector<VoteRecord> votes;
  for (int i = 0; i < 3; ++i) {
    ChartSpec target = testutil::simple_line("c_t" + std::to_string(i));
    auto ds = line_distractors_diff_y();
    BenchmarkGroup g = group_for(target, ds);
    g.group_id = "g" + std::to_string(i);
    QueryGenResult qr = gen_queries(g, target, ds);
    g.precise_query = qr.precise;
    g.fuzzy_query = qr.fuzzy;
    groups.push_back(g);
    VoteRecord vp, vf;
    vp.query_id = qr.precise.id;
    vf.query_id = qr.fuzzy.id;
    vp.min_agree = vf.min_agree = 5;
    bool accept = i < 2;  // third group: both rejected
    for (int r = 0; r < 9; ++r) {
      vp.votes.push_back(accept && r < 6);
      vf.votes.push_back(accept && r < 7);
    }
    votes.push_back(vp);
    votes.push_back(vf);
  }

  AssembleResult res = assemble_benchmark(groups, votes);
  CHECK(res.accepted_queries.size() == 4);
  REQUIRE(res.groups.size() == 3);
  CHECK(res.groups[0].status == GroupStatus::accepted);
  CHECK(res.groups[1].status == GroupStatus::accepted);
  CHECK(res.groups[2].status == GroupStatus::rejected);
  for (const auto& q : res.accepted_queries) CHECK(q.group_id != "g2");
  // the rejected group is retained with its queries
  CHECK(res.groups[2].precise_query.has_value());

  // dangling references fail loudly
  std::vector<VoteRecord> missing(votes.begin(), votes.end() - 1);
  CHECK_THROWS_WITH_AS(assemble_benchmark(groups, missing), doctest::Contains("no vote"),
                       ValidationError);
  VoteRecord orphan;
  orphan.query_id = "q_orphan";
  orphan.min_agree = 5;
  orphan.votes = std::vector<bool>(9, true);
  auto extra = votes;
  extra.push_back(orphan);
  CHECK_THROWS_WITH_AS(assemble_benchmark(groups, extra), doctest::Contains("unknown query"),
                       ValidationError);
}

TEST_CASE("vote records round trip through votes.jsonl") {
  testutil::TempDir dir("votes");
  std::vector<VoteRecord> votes;
  VoteRecord v;
  v.query_id = "q1";
  v.votes = {true, false, true, true, false, true, true, false, true};
  v.min_agree = 5;
  votes.push_back(v);
  std::string path = dir.str() + "/votes.jsonl";
  save_votes(votes, path);
  auto loaded = load_votes(path);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].query_id == "q1");
  CHECK(loaded[0].votes == votes[0].votes);
  CHECK(loaded[0].min_agree == 5);
}
