#include "csem/retrieval.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace csem::retr {

VectorIndex build_index(const std::vector<std::pair<std::string, EmbeddingVector>>& pairs) {
  VectorIndex index;
  if (pairs.empty()) return index;
  index.dim = pairs[0].second.dim;

  std::vector<size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return pairs[a].first < pairs[b].first; });

  index.ids.reserve(pairs.size());
  index.data.reserve(pairs.size() * static_cast<size_t>(index.dim));
  for (size_t i : order) {
    const auto& [id, vec] = pairs[i];
    if (vec.dim != index.dim)
      throw ValidationError("index dim mismatch for '" + id + "': " +
                            std::to_string(vec.dim) + " vs " + std::to_string(index.dim));
    if (!index.ids.empty() && index.ids.back() == id)
      throw ValidationError("duplicate id in index: '" + id + "'");
    index.ids.push_back(id);
    for (double v : vec.values) index.data.push_back(static_cast<float>(v));
  }
  return index;
}

RankedList search(const VectorIndex& index, const EmbeddingVector& query, int k,
                  const std::string& query_id) {
  if (k < 1) throw ValidationError("search k must be >= 1");
  if (query.dim != index.dim)
    throw ValidationError("query dim " + std::to_string(query.dim) +
                          " does not match index dim " + std::to_string(index.dim));

  const size_t n = index.size();
  std::vector<double> scores(n);
  for (size_t i = 0; i < n; ++i)
    scores[i] = dot_score(index.vec(i), query.values.data(), index.dim);

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  size_t take = std::min<size_t>(static_cast<size_t>(k), n);
  // ids are sorted ascending, so index order is the id tie-break
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                    order.end(), [&](size_t a, size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });

  RankedList out;
  out.query_id = query_id;
  out.k = k;
  out.entries.reserve(take);
  for (size_t i = 0; i < take; ++i)
    out.entries.push_back({index.ids[order[i]], scores[order[i]]});
  return out;
}

std::vector<RankedList> batch_search(
    const VectorIndex& index,
    const std::vector<std::pair<std::string, EmbeddingVector>>& queries, int k) {
  std::vector<RankedList> out(queries.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (size_t i = 0; i < queries.size(); ++i)
    out[i] = search(index, queries[i].second, k, queries[i].first);
  return out;
}

void save_index(const VectorIndex& index, const std::string& path) {
  std::vector<std::pair<std::string, EmbeddingVector>> entries;
  entries.reserve(index.size());
  for (size_t i = 0; i < index.size(); ++i) {
    EmbeddingVector v;
    v.dim = index.dim;
    const float* p = index.vec(i);
    v.values.assign(p, p + index.dim);
    entries.push_back({index.ids[i], std::move(v)});
  }
  save_embeddings(path, entries);
}

VectorIndex load_index(const std::string& path, const std::vector<std::string>& known_ids) {
  return build_index(load_embeddings(path, known_ids));
}

}  // namespace csem::retr
