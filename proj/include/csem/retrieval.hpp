#pragma once

#include <string>
#include <vector>

#include "csem/chartcore.hpp"

namespace csem::retr {

// Flat exact-search index. Vectors are stored contiguously as f32 (the
// embeddings.bin precision); scores accumulate in double.
struct VectorIndex {
  int dim = 0;
  std::vector<std::string> ids;  // ascending
  std::vector<float> data;       // ids.size() x dim

  size_t size() const { return ids.size(); }
  const float* vec(size_t i) const { return data.data() + i * static_cast<size_t>(dim); }
};

VectorIndex build_index(const std::vector<std::pair<std::string, EmbeddingVector>>& pairs);

RankedList search(const VectorIndex& index, const EmbeddingVector& query, int k,
                  const std::string& query_id = "");

// element-wise identical to repeated search; parallel across queries
std::vector<RankedList> batch_search(const VectorIndex& index,
                                     const std::vector<std::pair<std::string, EmbeddingVector>>& queries,
                                     int k);

void save_index(const VectorIndex& index, const std::string& path);
VectorIndex load_index(const std::string& path, const std::vector<std::string>& known_ids);

// shared score kernel so every code path ranks identically
inline double dot_score(const float* v, const double* q, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += static_cast<double>(v[i]) * q[i];
  return s;
}

}  // namespace csem::retr
