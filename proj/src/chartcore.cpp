#include "csem/chartcore.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace csem {

std::vector<std::string> tokenize_words(std::string_view text) {
  std::string norm;
  norm.reserve(text.size());
  for (char c : text) {
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      norm.push_back(c);
    } else if (c >= 'A' && c <= 'Z') {
      norm.push_back(static_cast<char>(c - 'A' + 'a'));
    } else {
      norm.push_back(' ');
    }
  }
  std::vector<std::string> out;
  std::istringstream iss(norm);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

std::optional<double> parse_x_value(const std::string& s) {
  if (s.empty()) return std::nullopt;
  // YYYY-MM
  if (s.size() == 7 && s[4] == '-') {
    bool digits = true;
    for (size_t i = 0; i < s.size(); ++i) {
      if (i == 4) continue;
      if (s[i] < '0' || s[i] > '9') digits = false;
    }
    if (digits) {
      int year = std::stoi(s.substr(0, 4));
      int month = std::stoi(s.substr(5, 2));
      if (month >= 1 && month <= 12) return year + (month - 1) / 12.0;
    }
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(v)) return v;
  return std::nullopt;
}

// ---------------------------------------------------------------- enums

std::string to_string(ColumnKind k) {
  switch (k) {
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::temporal: return "temporal";
  }
  return "categorical";
}

std::string to_string(ChartType t) {
  switch (t) {
    case ChartType::bar: return "bar";
    case ChartType::pie: return "pie";
    case ChartType::line: return "line";
    case ChartType::scatter: return "scatter";
    case ChartType::grouped_line: return "grouped_line";
    case ChartType::stacked_bar: return "stacked_bar";
    case ChartType::grouped_bar: return "grouped_bar";
  }
  return "bar";
}

std::string to_string(LineStyle s) {
  switch (s) {
    case LineStyle::solid: return "solid";
    case LineStyle::dashed: return "dashed";
    case LineStyle::dotted: return "dotted";
  }
  return "solid";
}

std::string to_string(Marker m) {
  switch (m) {
    case Marker::circle: return "circle";
    case Marker::square: return "square";
    case Marker::triangle: return "triangle";
    case Marker::none: return "none";
  }
  return "none";
}

std::string to_string(PieVariant p) {
  return p == PieVariant::donut ? "donut" : "pie";
}

std::string to_string(InsightLevel l) {
  switch (l) {
    case InsightLevel::visual: return "visual";
    case InsightLevel::statistics: return "statistics";
    case InsightLevel::task: return "task";
  }
  return "visual";
}

std::string to_string(Provenance p) {
  return p == Provenance::generative_service ? "generative_service" : "template";
}

std::string to_string(QueryKind k) {
  return k == QueryKind::fuzzy ? "fuzzy" : "precise";
}

std::string to_string(GroupStatus s) {
  switch (s) {
    case GroupStatus::candidate: return "candidate";
    case GroupStatus::accepted: return "accepted";
    case GroupStatus::rejected: return "rejected";
  }
  return "candidate";
}

namespace {
[[noreturn]] void bad_enum(const std::string& what, const std::string& s) {
  throw ValidationError("unknown " + what + " value: '" + s + "'");
}
}  // namespace

ColumnKind column_kind_from(const std::string& s) {
  if (s == "categorical") return ColumnKind::categorical;
  if (s == "numeric") return ColumnKind::numeric;
  if (s == "temporal") return ColumnKind::temporal;
  bad_enum("column kind", s);
}

ChartType chart_type_from(const std::string& s) {
  if (s == "bar") return ChartType::bar;
  if (s == "pie") return ChartType::pie;
  if (s == "line") return ChartType::line;
  if (s == "scatter") return ChartType::scatter;
  if (s == "grouped_line") return ChartType::grouped_line;
  if (s == "stacked_bar") return ChartType::stacked_bar;
  if (s == "grouped_bar") return ChartType::grouped_bar;
  bad_enum("chart type", s);
}

LineStyle line_style_from(const std::string& s) {
  if (s == "solid") return LineStyle::solid;
  if (s == "dashed") return LineStyle::dashed;
  if (s == "dotted") return LineStyle::dotted;
  bad_enum("line style", s);
}

Marker marker_from(const std::string& s) {
  if (s == "circle") return Marker::circle;
  if (s == "square") return Marker::square;
  if (s == "triangle") return Marker::triangle;
  if (s == "none") return Marker::none;
  bad_enum("marker", s);
}

PieVariant pie_variant_from(const std::string& s) {
  if (s == "pie") return PieVariant::pie;
  if (s == "donut") return PieVariant::donut;
  bad_enum("pie variant", s);
}

InsightLevel insight_level_from(const std::string& s) {
  if (s == "visual") return InsightLevel::visual;
  if (s == "statistics") return InsightLevel::statistics;
  if (s == "task") return InsightLevel::task;
  bad_enum("insight level", s);
}

Provenance provenance_from(const std::string& s) {
  if (s == "template") return Provenance::template_gen;
  if (s == "generative_service") return Provenance::generative_service;
  bad_enum("provenance", s);
}

QueryKind query_kind_from(const std::string& s) {
  if (s == "precise") return QueryKind::precise;
  if (s == "fuzzy") return QueryKind::fuzzy;
  bad_enum("query kind", s);
}

GroupStatus group_status_from(const std::string& s) {
  if (s == "candidate") return GroupStatus::candidate;
  if (s == "accepted") return GroupStatus::accepted;
  if (s == "rejected") return GroupStatus::rejected;
  bad_enum("group status", s);
}

std::string chart_type_phrase(ChartType t) {
  switch (t) {
    case ChartType::grouped_line: return "grouped line";
    case ChartType::stacked_bar: return "stacked bar";
    case ChartType::grouped_bar: return "grouped bar";
    default: return to_string(t);
  }
}

// ----------------------------------------------------------- validation

void Table::validate() const {
  if (id.empty()) throw ValidationError("table with empty id");
  std::set<std::string> names;
  for (const auto& c : columns) {
    if (c.name.empty())
      throw ValidationError("table " + id + ": empty column name");
    if (!names.insert(c.name).second)
      throw ValidationError("table " + id + ": duplicate column name '" + c.name + "'");
  }
  for (size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != columns.size())
      throw ValidationError("table " + id + ": row " + std::to_string(r) + " has " +
                            std::to_string(row.size()) + " cells, expected " +
                            std::to_string(columns.size()));
    for (size_t c = 0; c < row.size(); ++c) {
      if (row[c].empty())
        throw ValidationError("table " + id + ": missing value at row " +
                              std::to_string(r) + " column '" + columns[c].name + "'");
      if (columns[c].kind == ColumnKind::numeric || columns[c].kind == ColumnKind::temporal) {
        if (!parse_x_value(row[c]))
          throw ValidationError("table " + id + ": cell '" + row[c] + "' in column '" +
                                columns[c].name + "' does not parse as " +
                                to_string(columns[c].kind));
      }
    }
  }
}

void validate_chart(const ChartSpec& spec) {
  auto fail = [&](const std::string& msg) {
    throw ValidationError("chart " + spec.id + ": " + msg);
  };
  if (spec.id.empty()) throw ValidationError("chart with empty id");
  if (spec.title.empty()) fail("empty title");
  if (spec.series.empty()) fail("no series");
  if (spec.style.canvas_w < 64 || spec.style.canvas_h < 64) fail("canvas below 64px");
  if (!(spec.style.title_band_frac > 0.0 && spec.style.title_band_frac < 0.25))
    fail("title_band_frac out of (0, 0.25)");
  if (!(spec.style.margin_frac > 0.0 && spec.style.margin_frac < 0.25))
    fail("margin_frac out of (0, 0.25)");
  if (spec.chart_type == ChartType::pie) {
    if (spec.series.size() != 1) fail("pie chart must have exactly one series");
    for (const auto& p : spec.series[0].points)
      if (p.y < 0.0) fail("pie chart with negative slice '" + p.x + "'");
  }
  for (const auto& s : spec.series) {
    if (s.points.empty()) fail("empty series '" + s.category + "'");
    std::set<std::string> xs;
    for (const auto& p : s.points) {
      if (!xs.insert(p.x).second)
        fail("duplicate x value '" + p.x + "' in series '" + s.category + "'");
      if (!std::isfinite(p.y)) fail("non-finite y value in series '" + s.category + "'");
    }
  }
  if (!spec.categories.empty() && spec.categories.size() != spec.series.size())
    fail("categories/series size mismatch");
}

void validate_insight(const Insight& insight) {
  if (insight.chart_id.empty())
    throw ValidationError("insight with empty chart_id");
  if (insight.text.empty())
    throw ValidationError("insight for " + insight.chart_id + ": empty text");
  if (insight.provenance == Provenance::template_gen) {
    size_t wc = word_count(insight.text);
    if (wc < 30 || wc > 160)
      throw ValidationError("insight for " + insight.chart_id + ": template word count " +
                            std::to_string(wc) + " outside [30,160]");
  }
}

void validate_query(const TextQuery& query) {
  if (query.id.empty()) throw ValidationError("query with empty id");
  if (query.text.empty()) throw ValidationError("query " + query.id + ": empty text");
  if (query.target_chart_id.empty())
    throw ValidationError("query " + query.id + ": empty target_chart_id");
}

void validate_group(const BenchmarkGroup& group, double threshold) {
  auto fail = [&](const std::string& msg) {
    throw ValidationError("group " + group.group_id + ": " + msg);
  };
  if (group.distractor_ids.size() != 4) fail("must have exactly 4 distractors");
  if (group.anchor_similarities.size() != group.distractor_ids.size())
    fail("similarities/distractors size mismatch");
  std::set<std::string> ids(group.distractor_ids.begin(), group.distractor_ids.end());
  if (ids.size() != group.distractor_ids.size()) fail("duplicate distractor");
  if (ids.count(group.target_id)) fail("target listed as distractor");
  for (double s : group.anchor_similarities)
    if (s < threshold) fail("anchor similarity " + std::to_string(s) + " below threshold");
}

std::vector<Violation> validate_corpus(const std::vector<ChartSpec>& charts,
                                       const std::vector<Insight>& insights) {
  std::vector<Violation> out;
  std::unordered_set<std::string> chart_ids;
  for (const auto& c : charts) {
    if (!chart_ids.insert(c.id).second)
      out.push_back({c.id, "duplicate chart id"});
    try {
      validate_chart(c);
    } catch (const ValidationError& e) {
      out.push_back({c.id, e.what()});
    }
  }
  for (const auto& i : insights) {
    try {
      validate_insight(i);
    } catch (const ValidationError& e) {
      out.push_back({i.chart_id, e.what()});
    }
    if (!chart_ids.count(i.chart_id))
      out.push_back({i.chart_id, "insight references unknown chart"});
  }
  return out;
}

// ------------------------------------------------------ EmbeddingVector

void EmbeddingVector::normalize() {
  if (dim <= 0 || values.size() != static_cast<size_t>(dim))
    throw ValidationError("embedding dim/values mismatch");
  double sq = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("non-finite embedding value");
    sq += v * v;
  }
  double n = std::sqrt(sq);
  if (n < 1e-12) {
    double u = 1.0 / std::sqrt(static_cast<double>(dim));
    std::fill(values.begin(), values.end(), u);
    return;
  }
  for (double& v : values) v /= n;
}

bool EmbeddingVector::is_unit(double tol) const {
  double sq = 0.0;
  for (double v : values) sq += v * v;
  return std::fabs(std::sqrt(sq) - 1.0) <= tol;
}

// ------------------------------------------------------------ JSONL IO

namespace {

ojson style_to_json(const StyleParams& s) {
  ojson j;
  j["palette_id"] = s.palette_id;
  j["line_style"] = to_string(s.line_style);
  j["marker"] = to_string(s.marker);
  j["pie_variant"] = to_string(s.pie_variant);
  j["canvas_w"] = s.canvas_w;
  j["canvas_h"] = s.canvas_h;
  j["title_band_frac"] = s.title_band_frac;
  j["margin_frac"] = s.margin_frac;
  j["seed"] = s.seed;
  return j;
}

StyleParams style_from_json(const ojson& j) {
  StyleParams s;
  s.palette_id = j.at("palette_id").get<int>();
  s.line_style = line_style_from(j.at("line_style").get<std::string>());
  s.marker = marker_from(j.at("marker").get<std::string>());
  s.pie_variant = pie_variant_from(j.at("pie_variant").get<std::string>());
  s.canvas_w = j.at("canvas_w").get<int>();
  s.canvas_h = j.at("canvas_h").get<int>();
  s.title_band_frac = j.at("title_band_frac").get<double>();
  s.margin_frac = j.at("margin_frac").get<double>();
  s.seed = j.at("seed").get<uint64_t>();
  return s;
}

ojson chart_to_json(const ChartSpec& c) {
  ojson j;
  j["id"] = c.id;
  j["chart_type"] = to_string(c.chart_type);
  j["title"] = c.title;
  j["subtitle"] = c.subtitle;
  j["x_name"] = c.x_name;
  j["y_name"] = c.y_name;
  j["categories"] = c.categories;
  ojson series = ojson::array();
  for (const auto& s : c.series) {
    ojson js;
    js["category"] = s.category;
    ojson pts = ojson::array();
    for (const auto& p : s.points) pts.push_back(ojson::array({p.x, p.y}));
    js["points"] = std::move(pts);
    series.push_back(std::move(js));
  }
  j["series"] = std::move(series);
  j["style"] = style_to_json(c.style);
  j["source_table_id"] = c.source_table_id;
  j["svg_path"] = c.svg_path;
  return j;
}

ChartSpec chart_from_json(const ojson& j) {
  ChartSpec c;
  c.id = j.at("id").get<std::string>();
  c.chart_type = chart_type_from(j.at("chart_type").get<std::string>());
  c.title = j.at("title").get<std::string>();
  c.subtitle = j.at("subtitle").get<std::string>();
  c.x_name = j.at("x_name").get<std::string>();
  c.y_name = j.at("y_name").get<std::string>();
  c.categories = j.at("categories").get<std::vector<std::string>>();
  for (const auto& js : j.at("series")) {
    Series s;
    s.category = js.at("category").get<std::string>();
    for (const auto& p : js.at("points"))
      s.points.push_back({p.at(0).get<std::string>(), p.at(1).get<double>()});
    c.series.push_back(std::move(s));
  }
  c.style = style_from_json(j.at("style"));
  c.source_table_id = j.at("source_table_id").get<std::string>();
  c.svg_path = j.at("svg_path").get<std::string>();
  return c;
}

ojson insight_to_json(const Insight& i) {
  ojson j;
  j["chart_id"] = i.chart_id;
  j["level"] = to_string(i.level);
  j["text"] = i.text;
  j["provenance"] = to_string(i.provenance);
  return j;
}

Insight insight_from_json(const ojson& j) {
  Insight i;
  i.chart_id = j.at("chart_id").get<std::string>();
  i.level = insight_level_from(j.at("level").get<std::string>());
  i.text = j.at("text").get<std::string>();
  i.provenance = provenance_from(j.at("provenance").get<std::string>());
  return i;
}

ojson query_to_json(const TextQuery& q) {
  ojson j;
  j["id"] = q.id;
  j["text"] = q.text;
  j["kind"] = to_string(q.kind);
  j["target_chart_id"] = q.target_chart_id;
  j["group_id"] = q.group_id;
  return j;
}

TextQuery query_from_json(const ojson& j) {
  TextQuery q;
  q.id = j.at("id").get<std::string>();
  q.text = j.at("text").get<std::string>();
  q.kind = query_kind_from(j.at("kind").get<std::string>());
  q.target_chart_id = j.at("target_chart_id").get<std::string>();
  q.group_id = j.at("group_id").get<std::string>();
  return q;
}

ojson group_to_json(const BenchmarkGroup& g) {
  ojson j;
  j["group_id"] = g.group_id;
  j["target_id"] = g.target_id;
  j["distractor_ids"] = g.distractor_ids;
  j["anchor_similarities"] = g.anchor_similarities;
  j["precise_query"] = g.precise_query ? query_to_json(*g.precise_query) : ojson(nullptr);
  j["fuzzy_query"] = g.fuzzy_query ? query_to_json(*g.fuzzy_query) : ojson(nullptr);
  j["status"] = to_string(g.status);
  return j;
}

BenchmarkGroup group_from_json(const ojson& j) {
  BenchmarkGroup g;
  g.group_id = j.at("group_id").get<std::string>();
  g.target_id = j.at("target_id").get<std::string>();
  g.distractor_ids = j.at("distractor_ids").get<std::vector<std::string>>();
  g.anchor_similarities = j.at("anchor_similarities").get<std::vector<double>>();
  if (!j.at("precise_query").is_null()) g.precise_query = query_from_json(j.at("precise_query"));
  if (!j.at("fuzzy_query").is_null()) g.fuzzy_query = query_from_json(j.at("fuzzy_query"));
  g.status = group_status_from(j.at("status").get<std::string>());
  return g;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for reading: " + path);
  return f;
}

template <typename T, typename ToJson>
void save_jsonl(const std::vector<T>& records, const std::string& path, ToJson to_json) {
  auto f = open_out(path);
  for (const auto& r : records) f << to_json(r).dump() << "\n";
  if (!f) throw IoError("write failure: " + path);
}

template <typename FromJson>
auto load_jsonl(const std::string& path, FromJson from_json)
    -> std::vector<decltype(from_json(std::declval<ojson>()))> {
  auto f = open_in(path);
  std::vector<decltype(from_json(std::declval<ojson>()))> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    ojson j = ojson::parse(line, nullptr, false);
    if (j.is_discarded())
      throw ValidationError("malformed JSON at " + path + ":" + std::to_string(lineno));
    try {
      out.push_back(from_json(j));
    } catch (const ojson::exception& e) {
      throw ValidationError("bad record at " + path + ":" + std::to_string(lineno) + ": " +
                            e.what());
    }
  }
  return out;
}

}  // namespace

void save_corpus(const std::vector<ChartSpec>& charts, const std::vector<Insight>& insights,
                 const std::string& dir,
                 const std::map<std::string, std::string>* svg_by_chart) {
  for (const auto& c : charts) validate_chart(c);
  for (const auto& i : insights) validate_insight(i);
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "svg", ec);
  if (ec) throw IoError("cannot create directory: " + dir + " (" + ec.message() + ")");
  save_jsonl(charts, (fs::path(dir) / "charts.jsonl").string(), chart_to_json);
  save_jsonl(insights, (fs::path(dir) / "insights.jsonl").string(), insight_to_json);
  if (svg_by_chart) {
    for (const auto& [id, svg] : *svg_by_chart) {
      auto f = open_out((fs::path(dir) / "svg" / (id + ".svg")).string());
      f << svg;
    }
  }
}

Corpus load_corpus(const std::string& dir) {
  Corpus corpus;
  corpus.charts = load_jsonl((fs::path(dir) / "charts.jsonl").string(), chart_from_json);
  corpus.insights = load_jsonl((fs::path(dir) / "insights.jsonl").string(), insight_from_json);
  std::sort(corpus.charts.begin(), corpus.charts.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  std::stable_sort(corpus.insights.begin(), corpus.insights.end(),
                   [](const auto& a, const auto& b) { return a.chart_id < b.chart_id; });
  std::unordered_set<std::string> seen;
  for (const auto& c : corpus.charts) {
    if (!seen.insert(c.id).second)
      throw ValidationError("duplicate chart id '" + c.id + "' in " + dir);
    validate_chart(c);
  }
  for (const auto& i : corpus.insights) validate_insight(i);
  return corpus;
}

void save_queries(const std::vector<TextQuery>& queries, const std::string& path) {
  for (const auto& q : queries) validate_query(q);
  save_jsonl(queries, path, query_to_json);
}

std::vector<TextQuery> load_queries(const std::string& path) {
  auto out = load_jsonl(path, query_from_json);
  for (const auto& q : out) validate_query(q);
  return out;
}

void save_groups(const std::vector<BenchmarkGroup>& groups, const std::string& path) {
  save_jsonl(groups, path, group_to_json);
}

std::vector<BenchmarkGroup> load_groups(const std::string& path) {
  return load_jsonl(path, group_from_json);
}

// ------------------------------------------------------- embeddings.bin

namespace {
template <typename T>
void write_le(std::ofstream& f, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  f.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& f, const std::string& path) {
  T v;
  if (!f.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw IoError("truncated file: " + path);
  return v;
}
}  // namespace

void save_embeddings(const std::string& path,
                     const std::vector<std::pair<std::string, EmbeddingVector>>& entries) {
  auto f = open_out(path);
  f.write("CSEM", 4);
  uint32_t dim = entries.empty() ? 0u : static_cast<uint32_t>(entries[0].second.dim);
  write_le(f, dim);
  write_le(f, static_cast<uint64_t>(entries.size()));
  for (const auto& [id, vec] : entries) {
    if (vec.dim != static_cast<int>(dim))
      throw ValidationError("embedding dim mismatch for '" + id + "'");
    IdHash128 h = id_hash128(id);
    write_le(f, h.lo);
    write_le(f, h.hi);
    for (double v : vec.values) write_le(f, static_cast<float>(v));
  }
  if (!f) throw IoError("write failure: " + path);
}

std::vector<EmbeddingRecord> load_embeddings_raw(const std::string& path) {
  auto f = open_in(path);
  char magic[4];
  if (!f.read(magic, 4) || std::memcmp(magic, "CSEM", 4) != 0)
    throw ValidationError("bad magic in " + path);
  uint32_t dim = read_le<uint32_t>(f, path);
  uint64_t count = read_le<uint64_t>(f, path);
  std::vector<EmbeddingRecord> out;
  out.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    EmbeddingRecord rec;
    rec.hash.lo = read_le<uint64_t>(f, path);
    rec.hash.hi = read_le<uint64_t>(f, path);
    rec.values.resize(dim);
    for (uint32_t d = 0; d < dim; ++d) rec.values[d] = read_le<float>(f, path);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<std::pair<std::string, EmbeddingVector>> load_embeddings(
    const std::string& path, const std::vector<std::string>& known_ids) {
  auto raw = load_embeddings_raw(path);
  std::unordered_map<uint64_t, std::vector<std::pair<IdHash128, std::string>>> lookup;
  for (const auto& id : known_ids) {
    IdHash128 h = id_hash128(id);
    lookup[h.lo].push_back({h, id});
  }
  std::vector<std::pair<std::string, EmbeddingVector>> out;
  out.reserve(raw.size());
  for (const auto& rec : raw) {
    const std::string* found = nullptr;
    auto it = lookup.find(rec.hash.lo);
    if (it != lookup.end()) {
      for (const auto& [h, id] : it->second)
        if (h == rec.hash) found = &id;
    }
    if (!found) throw ValidationError("embedding record with unknown id hash in " + path);
    EmbeddingVector v;
    v.dim = static_cast<int>(rec.values.size());
    v.values.assign(rec.values.begin(), rec.values.end());
    out.push_back({*found, std::move(v)});
  }
  return out;
}

}  // namespace csem
