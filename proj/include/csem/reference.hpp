#pragma once

#include <string>
#include <vector>

#include "csem/benchgen.hpp"
#include "csem/chartcore.hpp"
#include "csem/retrieval.hpp"

// Serial reference implementations, deliberately independent of the
// parallel kernels in csem_core. Tests assert kernel == reference; the
// bench_kernels tool times them against each other.
namespace csem::ref {

// full-sort top-k over the flat index
RankedList search_reference(const retr::VectorIndex& index, const EmbeddingVector& query,
                            int k, const std::string& query_id = "");

// O(n^2) pairwise grouping with the same anchor/threshold semantics
std::vector<BenchmarkGroup> group_reference(
    const std::vector<std::pair<std::string, EmbeddingVector>>& vectors,
    const bench::GroupingConfig& cfg);

}  // namespace csem::ref
