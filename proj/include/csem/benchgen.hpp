#pragma once

#include <string>
#include <vector>

#include "csem/chartcore.hpp"
#include "csem/encoder.hpp"

namespace csem::bench {

struct GroupingConfig {
  double threshold = 0.90;
  int group_size = 5;  // 1 target + 4 distractors
  bool distractor_reuse = true;

  void validate() const;
};

// Anchor-order grouping: iterate charts by id; a chart anchors a group when
// its (group_size-1) nearest others all clear the threshold. Each chart
// anchors at most one group.
std::vector<BenchmarkGroup> group_charts(
    const std::vector<std::pair<std::string, EmbeddingVector>>& vectors,
    const GroupingConfig& cfg);

struct QueryGenResult {
  TextQuery precise;
  TextQuery fuzzy;
  bool discriminative = true;  // false: precise fell back to field conjunction
};

QueryGenResult gen_queries(const BenchmarkGroup& group, const ChartSpec& target,
                           const std::vector<ChartSpec>& distractors,
                           const enc::EndpointConfig* backend = nullptr);

struct VoteRecord {
  std::string query_id;
  std::vector<bool> votes;  // chose-target flags, one per rater
  int min_agree = 5;
};

enum class ConsensusResult { accepted, rejected };

ConsensusResult validate_consensus(const VoteRecord& record);

// Seeded rater model, test/pipeline scaffolding only: a rater votes for the
// target with probability p depending on the query kind and whether the
// precise query was discriminative.
struct VoteSimParams {
  int n_raters = 9;
  int min_agree = 5;
  double p_true = 0.9;    // discriminative precise queries
  double p_false = 0.2;   // non-discriminative precise queries
  double p_fuzzy = 0.7;   // fuzzy queries
};

VoteRecord simulate_votes(const TextQuery& query, bool discriminative,
                          const VoteSimParams& params, uint64_t seed);

void save_votes(const std::vector<VoteRecord>& votes, const std::string& path);
std::vector<VoteRecord> load_votes(const std::string& path);

struct AssembleResult {
  std::vector<TextQuery> accepted_queries;
  std::vector<BenchmarkGroup> groups;  // statuses resolved
};

// Only consensus-accepted queries are emitted; a group may contribute both,
// one, or none of its queries and keeps its rejected status otherwise.
AssembleResult assemble_benchmark(const std::vector<BenchmarkGroup>& groups,
                                  const std::vector<VoteRecord>& votes);

}  // namespace csem::bench
