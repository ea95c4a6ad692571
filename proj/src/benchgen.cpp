#include "csem/benchgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "csem/statinsight.hpp"
#include "json.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace csem::bench {

void GroupingConfig::validate() const {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw ValidationError("grouping threshold outside (0,1]");
  if (group_size < 2) throw ValidationError("group_size must be >= 2");
}

namespace {

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim; ++i)
    s += a.values[static_cast<size_t>(i)] * b.values[static_cast<size_t>(i)];
  return s;
}

struct Neighbor {
  size_t idx;
  double sim;
};

// top-(group_size-1) neighbors of anchor among candidates, sim desc / id asc
std::vector<Neighbor> nearest(const std::vector<std::pair<std::string, EmbeddingVector>>& v,
                              size_t anchor, size_t want,
                              const std::vector<char>* excluded) {
  std::vector<Neighbor> all;
  all.reserve(v.size() - 1);
  for (size_t i = 0; i < v.size(); ++i) {
    if (i == anchor) continue;
    if (excluded && (*excluded)[i]) continue;
    all.push_back({i, dot(v[anchor].second, v[i].second)});
  }
  size_t take = std::min(want, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(),
                    [](const Neighbor& a, const Neighbor& b) {
                      if (a.sim != b.sim) return a.sim > b.sim;
                      return a.idx < b.idx;  // entries are in id order
                    });
  all.resize(take);
  return all;
}

}  // namespace

std::vector<BenchmarkGroup> group_charts(
    const std::vector<std::pair<std::string, EmbeddingVector>>& vectors,
    const GroupingConfig& cfg) {
  cfg.validate();
  if (vectors.size() < static_cast<size_t>(cfg.group_size)) return {};

  std::vector<std::pair<std::string, EmbeddingVector>> v = vectors;
  std::sort(v.begin(), v.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (size_t i = 1; i < v.size(); ++i)
    if (v[i].first == v[i - 1].first)
      throw ValidationError("duplicate chart id in grouping input: '" + v[i].first + "'");

  const size_t want = static_cast<size_t>(cfg.group_size - 1);

  auto make_group = [&](size_t anchor, const std::vector<Neighbor>& nn) {
    BenchmarkGroup g;
    g.group_id = "g_" + v[anchor].first;
    g.target_id = v[anchor].first;
    for (const auto& n : nn) {
      g.distractor_ids.push_back(v[n.idx].first);
      g.anchor_similarities.push_back(n.sim);
    }
    g.status = GroupStatus::candidate;
    return g;
  };

  std::vector<BenchmarkGroup> groups;
  if (cfg.distractor_reuse) {
    // anchor decisions are independent; scan in parallel, emit in id order
    std::vector<std::vector<Neighbor>> hits(v.size());
    std::vector<char> ok(v.size(), 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (size_t a = 0; a < v.size(); ++a) {
      auto nn = nearest(v, a, want, nullptr);
      if (nn.size() == want && nn.back().sim >= cfg.threshold) {
        // top list is sim-desc, so the minimum is the last entry
        hits[a] = std::move(nn);
        ok[a] = 1;
      }
    }
    for (size_t a = 0; a < v.size(); ++a)
      if (ok[a]) groups.push_back(make_group(a, hits[a]));
  } else {
    std::vector<char> used(v.size(), 0);
    for (size_t a = 0; a < v.size(); ++a) {
      if (used[a]) continue;
      auto nn = nearest(v, a, want, &used);
      if (nn.size() < want || nn.back().sim < cfg.threshold) continue;
      used[a] = 1;
      for (const auto& n : nn) used[n.idx] = 1;
      groups.push_back(make_group(a, nn));
    }
  }
  for (const auto& g : groups) validate_group(g, cfg.threshold);
  return groups;
}

// ---------------------------------------------------------- query assembly

namespace {

std::string purpose_phrase(ChartType t) {
  switch (t) {
    case ChartType::line:
    case ChartType::grouped_line:
      return "trend analysis or comparison over time";
    case ChartType::bar:
    case ChartType::grouped_bar:
      return "value comparison or ranking";
    case ChartType::pie:
    case ChartType::stacked_bar:
      return "distribution or proportion comparison";
    case ChartType::scatter:
      return "correlation or pattern analysis";
  }
  return "value comparison or ranking";
}

void append_words(std::vector<std::string>& out, const std::string& text) {
  for (auto& w : tokenize_words(text)) out.push_back(w);
}

// x labels keep their surface form so ranges stay single comma-free tokens
std::string x_token(const std::string& x) {
  std::string t = to_lower(x);
  for (char& c : t)
    if (c == ',' || c == ' ') c = '-';
  return t;
}

std::string assemble(std::vector<std::string> words) {
  static const char* fillers[] = {"data", "overview", "summary", "view", "report",
                                  "details", "figures", "records"};
  size_t fi = 0;
  while (words.size() < 10) words.push_back(fillers[fi++ % 8]);
  if (words.size() > 15) words.resize(15);
  std::string text;
  for (const auto& w : words) {
    if (!text.empty()) text.push_back(' ');
    text += w;
  }
  while (text.size() > 120 && words.size() > 10) {
    words.pop_back();
    text.clear();
    for (const auto& w : words) {
      if (!text.empty()) text.push_back(' ');
      text += w;
    }
  }
  return text;
}

// tokens describing a chart's content: words from its fields plus the raw
// rendered forms of its x labels and headline numbers
std::set<std::string> field_tokens(const ChartSpec& spec) {
  std::set<std::string> toks;
  auto add = [&](const std::string& s) {
    for (auto& w : tokenize_words(s)) toks.insert(w);
  };
  add(spec.title);
  add(spec.subtitle);
  add(spec.x_name);
  add(spec.y_name);
  for (const auto& c : spec.categories) add(c);
  for (const auto& s : spec.series) {
    double lo = s.points[0].y, hi = lo;
    for (const auto& p : s.points) {
      lo = std::min(lo, p.y);
      hi = std::max(hi, p.y);
      toks.insert(x_token(p.x));
    }
    toks.insert(format_sig4(lo));
    toks.insert(format_sig4(hi));
  }
  return toks;
}

// a candidate separates the target when each distractor misses at least one
// of the candidate's content-bearing tokens (template glue does not count)
bool distinguishes(const std::vector<std::string>& key_tokens,
                   const std::vector<ChartSpec>& distractors) {
  if (key_tokens.empty()) return false;
  for (const auto& d : distractors) {
    auto dtoks = field_tokens(d);
    bool any_absent = false;
    for (const auto& t : key_tokens)
      if (!dtoks.count(t)) {
        any_absent = true;
        break;
      }
    if (!any_absent) return false;
  }
  return true;
}

struct PreciseCandidate {
  std::vector<std::string> words;
  std::vector<std::string> key_tokens;  // content tokens used for the check
  bool available = false;
};

PreciseCandidate subrange_candidate(const ChartSpec& target) {
  PreciseCandidate cand;
  const auto& pts = target.series[0].points;
  if (pts.size() < 4) return cand;
  std::vector<std::string> xs;
  for (const auto& p : pts)
    if (parse_x_value(p.x)) xs.push_back(p.x);
  if (xs.size() < 4) return cand;
  std::sort(xs.begin(), xs.end(), [](const std::string& a, const std::string& b) {
    return *parse_x_value(a) < *parse_x_value(b);
  });
  // strictly inside the chart's own span
  size_t lo_i = std::max<size_t>(1, xs.size() / 4);
  size_t hi_i = std::min(xs.size() - 2, 3 * xs.size() / 4);
  if (lo_i >= hi_i) return cand;

  double best = pts[0].y;
  for (const auto& p : pts) best = std::max(best, p.y);

  append_words(cand.words, target.y_name);
  append_words(cand.words, target.x_name);
  cand.words.push_back("from");
  cand.words.push_back(x_token(xs[lo_i]));
  cand.words.push_back("to");
  cand.words.push_back(x_token(xs[hi_i]));
  cand.words.push_back("peaking");
  cand.words.push_back("near");
  cand.words.push_back(format_sig4(best));  // single token, keeps the decimal point
  append_words(cand.key_tokens, target.y_name);
  cand.key_tokens.push_back(format_sig4(best));
  cand.available = true;
  return cand;
}

PreciseCandidate category_diff_candidate(const ChartSpec& target,
                                         const std::vector<ChartSpec>& distractors) {
  PreciseCandidate cand;
  std::vector<std::string> cats = target.categories;
  if (cats.empty() && target.chart_type == ChartType::pie)
    for (const auto& p : target.series[0].points) cats.push_back(p.x);
  for (const auto& c : cats) {
    bool unique = true;
    for (const auto& d : distractors) {
      auto toks = field_tokens(d);
      bool present = true;
      for (auto& w : tokenize_words(c))
        if (!toks.count(w)) present = false;
      if (present) unique = false;
    }
    if (unique) {
      append_words(cand.words, target.y_name);
      cand.words.push_back("for");
      append_words(cand.words, c);
      cand.words.push_back("compared");
      cand.words.push_back("with");
      cand.words.push_back("other");
      append_words(cand.words, target.x_name);
      cand.words.push_back("groups");
      append_words(cand.key_tokens, c);
      cand.available = true;
      return cand;
    }
  }
  return cand;
}

PreciseCandidate axis_diff_candidate(const ChartSpec& target,
                                     const std::vector<ChartSpec>& distractors) {
  PreciseCandidate cand;
  bool unique = true;
  for (const auto& d : distractors)
    if (d.x_name == target.x_name && d.y_name == target.y_name) unique = false;
  if (!unique) return cand;
  append_words(cand.words, target.y_name);
  cand.words.push_back("plotted");
  cand.words.push_back("against");
  append_words(cand.words, target.x_name);
  cand.words.push_back("in");
  cand.words.push_back("a");
  append_words(cand.words, chart_type_phrase(target.chart_type));
  cand.words.push_back("chart");
  append_words(cand.key_tokens, target.y_name);
  append_words(cand.key_tokens, target.x_name);
  cand.available = true;
  return cand;
}

std::string query_gen_prompt(const ChartSpec& target,
                             const std::vector<ChartSpec>& distractors) {
  std::ostringstream u;
  u << "You are a user searching for visualizations in a database. You will see 5 "
       "visualizations, but you should ONLY focus on the FIRST image when generating "
       "queries.\nThe other four images are very similar to the first one, make sure "
       "your queries CAN NOT match any of the other four images.\nGenerate two "
       "meaningful queries (10-15 words each):\n\n1. Precise Query:\nGenerate a query "
       "about specific content in the FIRST visualization that includes:\n\n- "
       "Meaningful combination of axis labels/categories\n- Important data values or "
       "time ranges\n- Key categories or measurements\n\n- If the image contains time, "
       "include the time range in the query.\n- When covering the time range, do not "
       "directly use the initial time range in the chart.\n- The time range must be "
       "within the original chart time span.\n- Do not use commas in your query.\n- Do "
       "not directly copy text from the image. Use similar wording instead.\n\n2. "
       "Fuzzy Query:\nGenerate a query about the visualization purpose that "
       "includes:\n\n- Line charts: trend analysis or comparison over time\n- Bar "
       "charts: value comparison or ranking\n- Pie/stacked charts: distribution or "
       "proportion comparison\n- Scatter plots: correlation or pattern "
       "analysis\n\nFormat your response as:\n{\n  \"Precise query\": \"10-15 word "
       "query about content\",\n  \"Fuzzy query\": \"10-15 word query about "
       "purpose\"\n}\n\nRemember:\n- ONLY consider the FIRST image\n- Include relevant "
       "context\n- Be specific and meaningful\n- Articles and prepositions count as "
       "words\n\n";
  auto describe = [&](const ChartSpec& s, int i) {
    u << "Image " << i << ": " << chart_type_phrase(s.chart_type) << " chart, title '"
      << s.title << "', x-axis '" << s.x_name << "', y-axis '" << s.y_name << "'\n";
  };
  describe(target, 1);
  for (size_t i = 0; i < distractors.size(); ++i)
    describe(distractors[i], static_cast<int>(i) + 2);
  return u.str();
}

bool query_text_valid(const std::string& text) {
  if (text.find(',') != std::string::npos) return false;
  size_t wc = word_count(text);
  return wc >= 10 && wc <= 15 && text.size() <= 120;
}

}  // namespace

QueryGenResult gen_queries(const BenchmarkGroup& group, const ChartSpec& target,
                           const std::vector<ChartSpec>& distractors,
                           const enc::EndpointConfig* backend) {
  if (target.id != group.target_id)
    throw ValidationError("gen_queries: target spec does not match group " + group.group_id);

  QueryGenResult result;
  result.precise.id = group.group_id + "_p";
  result.precise.kind = QueryKind::precise;
  result.precise.target_chart_id = group.target_id;
  result.precise.group_id = group.group_id;
  result.fuzzy = result.precise;
  result.fuzzy.id = group.group_id + "_f";
  result.fuzzy.kind = QueryKind::fuzzy;

  if (backend && !backend->url.empty()) {
    try {
      std::string raw = stat::generative_complete(
          "You generate search queries for a chart database.",
          query_gen_prompt(target, distractors), *backend);
      nlohmann::json j = nlohmann::json::parse(raw, nullptr, false);
      if (!j.is_discarded() && j.contains("Precise query") && j.contains("Fuzzy query")) {
        std::string p = j["Precise query"].get<std::string>();
        std::string f = j["Fuzzy query"].get<std::string>();
        if (query_text_valid(p) && query_text_valid(f)) {
          result.precise.text = p;
          result.fuzzy.text = f;
          result.discriminative = distinguishes(tokenize_words(p), distractors);
          return result;
        }
      }
    } catch (const NetworkError&) {
      // fall through to templates
    }
  }

  // precise: preferred routes in order, each kept only if it distinguishes
  PreciseCandidate chosen;
  {
    PreciseCandidate c = subrange_candidate(target);
    if (c.available && distinguishes(c.key_tokens, distractors)) chosen = std::move(c);
  }
  if (!chosen.available) {
    PreciseCandidate c = category_diff_candidate(target, distractors);
    if (c.available && distinguishes(c.key_tokens, distractors)) chosen = std::move(c);
  }
  if (!chosen.available) {
    PreciseCandidate c = axis_diff_candidate(target, distractors);
    if (c.available && distinguishes(c.key_tokens, distractors)) chosen = std::move(c);
  }
  if (chosen.available) {
    result.discriminative = true;
  } else {
    // full field conjunction fallback
    result.discriminative = false;
    chosen.words.clear();
    append_words(chosen.words, target.title);
    append_words(chosen.words, target.y_name);
    append_words(chosen.words, target.x_name);
    append_words(chosen.words, chart_type_phrase(target.chart_type));
    chosen.words.push_back("chart");
  }
  result.precise.text = assemble(chosen.words);

  std::vector<std::string> fw;
  append_words(fw, chart_type_phrase(target.chart_type));
  fw.push_back("chart");
  fw.push_back("for");
  append_words(fw, purpose_phrase(target.chart_type));
  fw.push_back("of");
  append_words(fw, target.y_name);
  fw.push_back("across");
  append_words(fw, target.x_name);
  result.fuzzy.text = assemble(fw);

  validate_query(result.precise);
  validate_query(result.fuzzy);
  return result;
}

// ------------------------------------------------------------- consensus

ConsensusResult validate_consensus(const VoteRecord& record) {
  if (record.votes.empty()) throw ValidationError("vote record with no votes");
  if (record.min_agree < 1 || record.min_agree > static_cast<int>(record.votes.size()))
    throw ValidationError("min_agree outside [1, n_raters] for " + record.query_id);
  int agree = 0;
  for (bool v : record.votes)
    if (v) ++agree;
  return agree >= record.min_agree ? ConsensusResult::accepted : ConsensusResult::rejected;
}

VoteRecord simulate_votes(const TextQuery& query, bool discriminative,
                          const VoteSimParams& params, uint64_t seed) {
  double p = query.kind == QueryKind::fuzzy
                 ? params.p_fuzzy
                 : (discriminative ? params.p_true : params.p_false);
  Rng rng(sub_seed(seed, "votes:" + query.id));
  VoteRecord rec;
  rec.query_id = query.id;
  rec.min_agree = params.min_agree;
  for (int i = 0; i < params.n_raters; ++i) rec.votes.push_back(rng.uniform() < p);
  return rec;
}

void save_votes(const std::vector<VoteRecord>& votes, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  for (const auto& v : votes) {
    nlohmann::ordered_json j;
    j["query_id"] = v.query_id;
    j["votes"] = v.votes;
    j["min_agree"] = v.min_agree;
    f << j.dump() << "\n";
  }
  if (!f) throw IoError("write failure: " + path);
}

std::vector<VoteRecord> load_votes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for reading: " + path);
  std::vector<VoteRecord> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw ValidationError("malformed JSON at " + path + ":" + std::to_string(lineno));
    VoteRecord v;
    v.query_id = j.at("query_id").get<std::string>();
    v.votes = j.at("votes").get<std::vector<bool>>();
    v.min_agree = j.at("min_agree").get<int>();
    out.push_back(std::move(v));
  }
  return out;
}

AssembleResult assemble_benchmark(const std::vector<BenchmarkGroup>& groups,
                                  const std::vector<VoteRecord>& votes) {
  std::map<std::string, const VoteRecord*> by_query;
  for (const auto& v : votes) by_query[v.query_id] = &v;

  AssembleResult out;
  std::unordered_set<std::string> known_queries;
  for (const auto& g : groups) {
    BenchmarkGroup resolved = g;
    bool any_accepted = false;
    auto judge = [&](const std::optional<TextQuery>& q) {
      if (!q) return;
      known_queries.insert(q->id);
      auto it = by_query.find(q->id);
      if (it == by_query.end())
        throw ValidationError("no vote record for query '" + q->id + "'");
      if (validate_consensus(*it->second) == ConsensusResult::accepted) {
        out.accepted_queries.push_back(*q);
        any_accepted = true;
      }
    };
    judge(resolved.precise_query);
    judge(resolved.fuzzy_query);
    resolved.status = any_accepted ? GroupStatus::accepted : GroupStatus::rejected;
    out.groups.push_back(std::move(resolved));
  }
  for (const auto& v : votes)
    if (!known_queries.count(v.query_id))
      throw ValidationError("vote record for unknown query '" + v.query_id + "'");
  return out;
}

}  // namespace csem::bench
