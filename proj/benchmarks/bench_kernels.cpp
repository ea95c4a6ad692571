// Times the OpenMP kernels against their serial reference implementations
// and verifies both sides agree on the way.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "csem/benchgen.hpp"
#include "csem/chartsynth.hpp"
#include "csem/encoder.hpp"
#include "csem/reference.hpp"
#include "csem/retrieval.hpp"
#include "csem/trainer.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace csem;
using Clock = std::chrono::steady_clock;

namespace {

double secs(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

std::vector<double> random_unit(Rng& rng, int dim) {
  std::vector<double> v(static_cast<size_t>(dim));
  double sq = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    sq += x * x;
  }
  double n = std::sqrt(sq);
  for (auto& x : v) x /= n;
  return v;
}

EmbeddingVector make_vec(std::vector<double> values) {
  EmbeddingVector v;
  v.dim = static_cast<int>(values.size());
  v.values = std::move(values);
  return v;
}

void report(const char* name, double parallel_s, double serial_s, bool agree) {
  std::printf("%-28s parallel %8.3fs   serial %8.3fs   speedup %5.2fx   %s\n", name,
              parallel_s, serial_s, serial_s / parallel_s, agree ? "match" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  size_t n_index = 22000;
  size_t n_queries = 326;
  size_t n_group = 1500;
  size_t n_charts = 300;
  if (argc > 1 && std::strcmp(argv[1], "--small") == 0) {
    n_index = 4000;
    n_queries = 64;
    n_group = 400;
    n_charts = 60;
  }

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (OpenMP unavailable)\n");
#endif
  Rng rng(17);

  // --- exact top-k search ---
  {
    std::vector<std::pair<std::string, EmbeddingVector>> entries;
    entries.reserve(n_index);
    for (size_t i = 0; i < n_index; ++i) {
      char id[24];
      std::snprintf(id, sizeof(id), "c%06zu", i);
      entries.push_back({id, make_vec(random_unit(rng, 128))});
    }
    retr::VectorIndex index = retr::build_index(entries);
    std::vector<std::pair<std::string, EmbeddingVector>> queries;
    for (size_t i = 0; i < n_queries; ++i)
      queries.push_back({"q" + std::to_string(i), make_vec(random_unit(rng, 128))});

    auto t0 = Clock::now();
    auto fast = retr::batch_search(index, queries, 10);
    auto t1 = Clock::now();
    std::vector<RankedList> slow(queries.size());
    for (size_t i = 0; i < queries.size(); ++i)
      slow[i] = ref::search_reference(index, queries[i].second, 10, queries[i].first);
    auto t2 = Clock::now();

    bool agree = true;
    for (size_t i = 0; i < queries.size(); ++i)
      for (size_t j = 0; j < fast[i].entries.size(); ++j)
        if (fast[i].entries[j].chart_id != slow[i].entries[j].chart_id ||
            fast[i].entries[j].score != slow[i].entries[j].score)
          agree = false;
    std::printf("top-10 search, %zu x %zu vectors (dim 128)\n", n_queries, n_index);
    report("  heap-select vs full sort", secs(t0, t1), secs(t1, t2), agree);
  }

  // --- similarity grouping ---
  {
    std::vector<std::pair<std::string, EmbeddingVector>> vectors;
    for (size_t i = 0; i < n_group; ++i) {
      char id[24];
      std::snprintf(id, sizeof(id), "c%05zu", i);
      vectors.push_back({id, make_vec(random_unit(rng, 32))});
    }
    for (size_t d = 0; d + 5 < n_group && d < 100; d += 5)
      for (size_t j = 1; j <= 4; ++j) vectors[d + j].second = vectors[d].second;
    bench::GroupingConfig cfg;

    auto t0 = Clock::now();
    auto fast = bench::group_charts(vectors, cfg);
    auto t1 = Clock::now();
    auto slow = ref::group_reference(vectors, cfg);
    auto t2 = Clock::now();

    bool agree = fast.size() == slow.size();
    for (size_t i = 0; agree && i < fast.size(); ++i)
      agree = fast[i].target_id == slow[i].target_id &&
              fast[i].distractor_ids == slow[i].distractor_ids;
    std::printf("grouping, %zu vectors (dim 32), threshold %.2f\n", n_group, cfg.threshold);
    report("  per-anchor scan vs O(n^2)", secs(t0, t1), secs(t1, t2), agree);
  }

  // --- chart feature extraction ---
  {
    synth::CorpusConfig cc;
    cc.seed = 23;
    cc.n_tables = static_cast<int>(n_charts / 4);
    cc.max_charts_per_table = 2;
    cc.style_variants = 2;
    cc.target_charts = static_cast<int>(n_charts);
    auto charts = synth::build_corpus(cc);
    enc::FeatureConfig fc;
    enc::PreprocessMode mode;

    auto t0 = Clock::now();
    auto parallel = train::compute_chart_inputs(charts, mode, fc);
    auto t1 = Clock::now();
    train::ChartInputMap serial;
    for (const auto& spec : charts)
      serial[spec.id] = enc::chart_input(enc::extract_chart_features(spec, mode, fc), fc);
    auto t2 = Clock::now();

    bool agree = parallel.size() == serial.size();
    for (const auto& [id, x] : parallel)
      if (!agree || serial.at(id).entries != x.entries) agree = false;
    std::printf("feature extraction, %zu charts\n", charts.size());
    report("  parallel vs serial loop", secs(t0, t1), secs(t1, t2), agree);
  }

  return 0;
}
