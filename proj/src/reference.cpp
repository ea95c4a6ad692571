#include "csem/reference.hpp"

#include <algorithm>
#include <numeric>

namespace csem::ref {

RankedList search_reference(const retr::VectorIndex& index, const EmbeddingVector& query,
                            int k, const std::string& query_id) {
  if (k < 1) throw ValidationError("search k must be >= 1");
  if (query.dim != index.dim) throw ValidationError("reference search dim mismatch");

  struct Scored {
    size_t idx;
    double score;
  };
  std::vector<Scored> all(index.size());
  for (size_t i = 0; i < index.size(); ++i)
    all[i] = {i, retr::dot_score(index.vec(i), query.values.data(), index.dim)};

  std::sort(all.begin(), all.end(), [&](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return index.ids[a.idx] < index.ids[b.idx];
  });

  RankedList out;
  out.query_id = query_id;
  out.k = k;
  size_t take = std::min<size_t>(static_cast<size_t>(k), all.size());
  for (size_t i = 0; i < take; ++i)
    out.entries.push_back({index.ids[all[i].idx], all[i].score});
  return out;
}

std::vector<BenchmarkGroup> group_reference(
    const std::vector<std::pair<std::string, EmbeddingVector>>& vectors,
    const bench::GroupingConfig& cfg) {
  cfg.validate();
  const size_t n = vectors.size();
  if (n < static_cast<size_t>(cfg.group_size)) return {};

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return vectors[a].first < vectors[b].first; });

  // full pairwise similarity matrix
  std::vector<double> sim(n * n, 0.0);
  for (size_t a = 0; a < n; ++a)
    for (size_t b = 0; b < n; ++b) {
      const auto& va = vectors[order[a]].second;
      const auto& vb = vectors[order[b]].second;
      double s = 0.0;
      for (int i = 0; i < va.dim; ++i)
        s += va.values[static_cast<size_t>(i)] * vb.values[static_cast<size_t>(i)];
      sim[a * n + b] = s;
    }

  const size_t want = static_cast<size_t>(cfg.group_size - 1);
  std::vector<BenchmarkGroup> groups;
  std::vector<char> used(n, 0);

  for (size_t a = 0; a < n; ++a) {
    if (!cfg.distractor_reuse && used[a]) continue;
    std::vector<size_t> others;
    for (size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      if (!cfg.distractor_reuse && used[b]) continue;
      others.push_back(b);
    }
    std::sort(others.begin(), others.end(), [&](size_t x, size_t y) {
      if (sim[a * n + x] != sim[a * n + y]) return sim[a * n + x] > sim[a * n + y];
      return x < y;
    });
    if (others.size() < want) continue;
    others.resize(want);
    double min_sim = sim[a * n + others.back()];
    if (min_sim < cfg.threshold) continue;

    BenchmarkGroup g;
    g.group_id = "g_" + vectors[order[a]].first;
    g.target_id = vectors[order[a]].first;
    for (size_t b : others) {
      g.distractor_ids.push_back(vectors[order[b]].first);
      g.anchor_similarities.push_back(sim[a * n + b]);
    }
    g.status = GroupStatus::candidate;
    groups.push_back(std::move(g));
    if (!cfg.distractor_reuse) {
      used[a] = 1;
      for (size_t b : others) used[b] = 1;
    }
  }
  return groups;
}

}  // namespace csem::ref
