#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "csem/common.hpp"

namespace csem {

enum class ColumnKind { categorical, numeric, temporal };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::categorical;
};

// Cells are stored as their rendered strings; numeric/temporal columns must
// parse under their declared kind (checked by validate()).
struct Table {
  std::string id;
  std::vector<Column> columns;
  std::vector<std::vector<std::string>> rows;

  void validate() const;  // throws ValidationError naming this table id
};

enum class ChartType { bar, pie, line, scatter, grouped_line, stacked_bar, grouped_bar };
enum class LineStyle { solid, dashed, dotted };
enum class Marker { circle, square, triangle, none };
enum class PieVariant { pie, donut };

struct StyleParams {
  int palette_id = 0;
  LineStyle line_style = LineStyle::solid;
  Marker marker = Marker::none;
  PieVariant pie_variant = PieVariant::pie;
  int canvas_w = 800;
  int canvas_h = 500;
  double title_band_frac = 0.08;
  double margin_frac = 0.10;
  uint64_t seed = 0;
};

struct SeriesPoint {
  std::string x;
  double y = 0.0;
};

struct Series {
  std::string category;  // empty for single-series charts
  std::vector<SeriesPoint> points;
};

struct ChartSpec {
  std::string id;
  ChartType chart_type = ChartType::bar;
  std::string title;
  std::string subtitle;
  std::string x_name;
  std::string y_name;
  std::vector<std::string> categories;  // empty => single series
  std::vector<Series> series;
  StyleParams style;
  std::string source_table_id;
  std::string svg_path;
};

enum class InsightLevel { visual, statistics, task };
enum class Provenance { template_gen, generative_service };

struct Insight {
  std::string chart_id;
  InsightLevel level = InsightLevel::visual;
  std::string text;
  Provenance provenance = Provenance::template_gen;
};

enum class QueryKind { precise, fuzzy };

struct TextQuery {
  std::string id;
  std::string text;
  QueryKind kind = QueryKind::precise;
  std::string target_chart_id;
  std::string group_id;
};

struct EmbeddingVector {
  int dim = 0;
  std::vector<double> values;

  // unit-normalizes in place; all-zero input becomes the uniform 1/sqrt(d)
  // sentinel so degenerate inputs still rank deterministically
  void normalize();
  bool is_unit(double tol = 1e-9) const;
};

enum class GroupStatus { candidate, accepted, rejected };

struct BenchmarkGroup {
  std::string group_id;
  std::string target_id;
  std::vector<std::string> distractor_ids;   // exactly 4
  std::vector<double> anchor_similarities;   // aligned with distractor_ids
  std::optional<TextQuery> precise_query;
  std::optional<TextQuery> fuzzy_query;
  GroupStatus status = GroupStatus::candidate;
};

struct RankedEntry {
  std::string chart_id;
  double score = 0.0;
};

struct RankedList {
  std::string query_id;
  std::vector<RankedEntry> entries;  // score desc, ties by chart_id asc
  int k = 0;
};

struct EvalReport {
  std::map<std::string, std::optional<int>> per_query_rank;  // 1-based
  std::map<int, double> r_at;
  double mrr_at_10 = 0.0;
  double ndcg_at_10 = 0.0;
  double overall = 0.0;
  std::string config_tag;
};

// ---- enum <-> string (used by JSONL serialization and the CLI) ----
std::string to_string(ColumnKind k);
std::string to_string(ChartType t);
std::string to_string(LineStyle s);
std::string to_string(Marker m);
std::string to_string(PieVariant p);
std::string to_string(InsightLevel l);
std::string to_string(Provenance p);
std::string to_string(QueryKind k);
std::string to_string(GroupStatus s);
ColumnKind column_kind_from(const std::string& s);
ChartType chart_type_from(const std::string& s);
LineStyle line_style_from(const std::string& s);
Marker marker_from(const std::string& s);
PieVariant pie_variant_from(const std::string& s);
InsightLevel insight_level_from(const std::string& s);
Provenance provenance_from(const std::string& s);
QueryKind query_kind_from(const std::string& s);
GroupStatus group_status_from(const std::string& s);

// human-readable chart family, e.g. grouped_line -> "grouped line"
std::string chart_type_phrase(ChartType t);

struct Violation {
  std::string record_id;
  std::string message;
};

// Full single-record checks; throw ValidationError naming the record.
void validate_chart(const ChartSpec& spec);
void validate_insight(const Insight& insight);
void validate_query(const TextQuery& query);
void validate_group(const BenchmarkGroup& group, double threshold);

// Corpus-level validation: type invariants plus referential integrity.
// Violations are data, not errors.
std::vector<Violation> validate_corpus(const std::vector<ChartSpec>& charts,
                                       const std::vector<Insight>& insights);

struct Corpus {
  std::vector<ChartSpec> charts;
  std::vector<Insight> insights;
};

// charts.jsonl + insights.jsonl + svg/<id>.svg under `dir`. Validates before
// writing; round-trips bit-exactly through load_corpus.
void save_corpus(const std::vector<ChartSpec>& charts,
                 const std::vector<Insight>& insights, const std::string& dir,
                 const std::map<std::string, std::string>* svg_by_chart = nullptr);

Corpus load_corpus(const std::string& dir);

// ---- single-file JSONL helpers (queries.jsonl, groups.jsonl, votes.jsonl) ----
void save_queries(const std::vector<TextQuery>& queries, const std::string& path);
std::vector<TextQuery> load_queries(const std::string& path);
void save_groups(const std::vector<BenchmarkGroup>& groups, const std::string& path);
std::vector<BenchmarkGroup> load_groups(const std::string& path);

// ---- embeddings.bin ----
// header: magic "CSEM", u32 dim, u64 count; then per record a 16-byte id
// hash followed by dim little-endian f32 values.
struct EmbeddingRecord {
  IdHash128 hash;
  std::vector<float> values;
};

void save_embeddings(const std::string& path,
                     const std::vector<std::pair<std::string, EmbeddingVector>>& entries);
std::vector<EmbeddingRecord> load_embeddings_raw(const std::string& path);
// resolves hashes back to ids; throws ValidationError on an unknown hash
std::vector<std::pair<std::string, EmbeddingVector>> load_embeddings(
    const std::string& path, const std::vector<std::string>& known_ids);

}  // namespace csem
