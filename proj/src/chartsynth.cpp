#include "csem/chartsynth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace csem::synth {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct ThemeVocab {
  std::vector<std::string> cat_names;
  std::vector<std::vector<std::string>> cat_pools;  // aligned with cat_names
  std::vector<std::string> num_names;
  std::vector<std::string> temp_names;
};

const ThemeVocab& theme_vocab(VocabTheme t) {
  static const std::vector<ThemeVocab> vocabs = {
      // sales
      {{"region", "product", "channel"},
       {{"north", "south", "east", "west", "central"},
        {"alpha", "bravo", "corvus", "delta", "echo", "futura"},
        {"online", "retail", "wholesale", "partner"}},
       {"revenue", "units", "profit", "returns"},
       {"month", "year"}},
      // population
      {{"country", "age_group", "area"},
       {{"atlantis", "borduria", "cascadia", "elbonia", "freedonia", "genovia"},
        {"children", "adults", "seniors", "youth"},
        {"urban", "rural", "suburban"}},
       {"population", "births", "deaths", "migration"},
       {"year", "decade"}},
      // temperature
      {{"station", "season"},
       {{"coastal", "mountain", "valley", "plains", "desert"},
        {"winter", "spring", "summer", "autumn"}},
       {"temperature", "rainfall", "humidity"},
       {"month", "year"}},
      // bookings
      {{"hotel", "roomtype", "market"},
       {{"seaside", "harbor", "summit", "garden", "plaza", "crescent"},
        {"single", "double", "suite", "family"},
        {"domestic", "international", "corporate"}},
       {"bookings", "cancellations", "occupancy", "rate"},
       {"month", "year"}},
      // income
      {{"sector", "bracket", "county"},
       {{"services", "industry", "agriculture", "technology", "finance"},
        {"lower", "middle", "upper"},
        {"lakeshire", "ridgeton", "brookfield", "kingsport", "mayfield"}},
       {"income", "wages", "savings", "expenses"},
       {"year", "quarter_start"}},
      // energy
      {{"source", "grid"},
       {{"solar", "wind", "hydro", "coal", "nuclear", "gas"},
        {"northern", "southern", "eastern", "western"}},
       {"output", "consumption", "capacity", "losses"},
       {"month", "year"}},
      // traffic
      {{"route", "vehicle"},
       {{"ringroad", "crosstown", "bypass", "mainline", "riverside"},
        {"cars", "trucks", "buses", "bikes"}},
       {"volume", "delays", "speed", "incidents"},
       {"month", "year"}},
      // ratings
      {{"title", "genre", "platform"},
       {{"nebula", "harvest", "skylark", "ember", "willow", "quartz"},
        {"drama", "comedy", "thriller", "documentary"},
        {"mobile", "desktop", "console"}},
       {"rating", "reviews", "watch_time"},
       {"month", "year"}},
      // inventory
      {{"warehouse", "category"},
       {{"dockside", "midtown", "airport", "outskirts"},
        {"tools", "fasteners", "paints", "lumber", "wiring", "fixtures"}},
       {"stock", "orders", "shrinkage", "turnover"},
       {"month", "year"}},
      // budget
      {{"department", "program"},
       {{"research", "operations", "marketing", "support", "logistics", "design"},
        {"outreach", "training", "upgrades", "maintenance"}},
       {"budget", "spend", "variance", "headcount"},
       {"year", "quarter_start"}},
      // enrollment
      {{"campus", "faculty", "level"},
       {{"northgate", "riverview", "hillcrest", "lakeside", "downtown"},
        {"science", "arts", "engineering", "business", "medicine"},
        {"undergraduate", "graduate", "certificate"}},
       {"enrollment", "applications", "graduates", "dropouts"},
       {"year", "term_start"}},
      // emissions
      {{"industry", "gas"},
       {{"transport", "power", "cement", "steel", "farming", "shipping"},
        {"co2", "methane", "nitrous"}},
       {"emissions", "intensity", "offsets"},
       {"year", "month"}},
  };
  return vocabs[static_cast<size_t>(t)];
}

const std::vector<std::string>& adjective_pool() {
  static const std::vector<std::string> v = {
      "quarterly", "annual", "monthly", "regional", "national", "global",
      "seasonal", "projected", "audited", "combined", "adjusted", "baseline",
      "consolidated", "preliminary", "revised", "weighted", "segmented",
      "historical", "comparative", "aggregate", "indexed", "normalized",
      "benchmark", "forecast", "rolling", "cumulative", "observed", "reported",
      "verified", "sampled", "weekly", "interim", "extended", "archived",
      "modeled", "estimated", "tracked", "surveyed", "published", "internal",
      "external", "official", "provisional", "detailed", "summary", "core",
      "primary", "secondary", "leading", "trailing", "peak", "offpeak",
      "gross", "net", "scaled", "filtered", "pooled", "matched", "blended",
      "standard"};
  return v;
}

const std::vector<std::string>& entity_pool() {
  static const std::vector<std::string> v = {
      "meridian", "aurora", "pinnacle", "vanguard", "horizon", "catalyst",
      "zenith", "frontier", "beacon", "summit", "compass", "anchor",
      "harbor", "citadel", "lattice", "prism", "vertex", "axiom",
      "quasar", "nimbus", "orchid", "falcon", "osprey", "heron",
      "condor", "kestrel", "merlin", "harrier", "pelican", "cormorant",
      "juniper", "cedar", "aspen", "rowan", "alder", "hawthorn",
      "basalt", "granite", "marble", "slate", "flint", "obsidian",
      "cobalt", "copper", "argent", "bronze", "platinum", "iridium",
      "trenton", "fairview", "oakdale", "westbrook", "eastvale", "southport",
      "northfield", "midland", "claremont", "ashford", "brighton", "calder"};
  return v;
}

std::string capitalize(const std::string& s) {
  std::string out = s;
  if (!out.empty() && out[0] >= 'a' && out[0] <= 'z')
    out[0] = static_cast<char>(out[0] - 'a' + 'A');
  return out;
}

std::string title_words(const std::string& snake) {
  std::string out;
  for (char c : snake) out.push_back(c == '_' ? ' ' : c);
  std::string result;
  std::istringstream iss(out);
  std::string w;
  while (iss >> w) {
    if (!result.empty()) result.push_back(' ');
    result += capitalize(w);
  }
  return result;
}

std::string hex_id(char prefix, uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%c%012llx",
                prefix, static_cast<unsigned long long>(h & 0xffffffffffffull));
  return buf;
}

std::string format_cell(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

enum class NumGen { linear, seasonal, walk, heavytail };

std::vector<double> gen_numeric_series(Rng& rng, size_t n) {
  NumGen kind = static_cast<NumGen>(rng.uniform_int(0, 3));
  double base = rng.uniform(20.0, 500.0);
  std::vector<double> out(n);
  switch (kind) {
    case NumGen::linear: {
      double slope = rng.uniform(-0.08, 0.12) * base;
      for (size_t i = 0; i < n; ++i)
        out[i] = base + slope * static_cast<double>(i) + rng.normal(0.0, 0.05 * base);
      break;
    }
    case NumGen::seasonal: {
      double period = rng.uniform(4.0, 12.0);
      double amp = rng.uniform(0.2, 0.6) * base;
      double phase = rng.uniform(0.0, 2.0 * kPi);
      for (size_t i = 0; i < n; ++i)
        out[i] = base + amp * std::sin(2.0 * kPi * static_cast<double>(i) / period + phase) +
                 rng.normal(0.0, 0.04 * base);
      break;
    }
    case NumGen::walk: {
      double v = base;
      for (size_t i = 0; i < n; ++i) {
        out[i] = v;
        v += rng.normal(0.0, 0.04 * base);
      }
      break;
    }
    case NumGen::heavytail: {
      for (size_t i = 0; i < n; ++i) out[i] = base * std::exp(rng.normal(0.0, 0.6));
      break;
    }
  }
  for (double& v : out) v = std::round(v * 100.0) / 100.0;
  return out;
}

}  // namespace

std::string to_string(VocabTheme t) {
  static const char* names[] = {"sales", "population", "temperature", "bookings",
                                "income", "energy", "traffic", "ratings",
                                "inventory", "budget", "enrollment", "emissions"};
  return names[static_cast<size_t>(t)];
}

VocabTheme vocab_theme_from(const std::string& s) {
  for (VocabTheme t : all_themes())
    if (to_string(t) == s) return t;
  throw ValidationError("unknown vocab theme: '" + s + "'");
}

const std::vector<VocabTheme>& all_themes() {
  static const std::vector<VocabTheme> v = {
      VocabTheme::sales, VocabTheme::population, VocabTheme::temperature,
      VocabTheme::bookings, VocabTheme::income, VocabTheme::energy,
      VocabTheme::traffic, VocabTheme::ratings, VocabTheme::inventory,
      VocabTheme::budget, VocabTheme::enrollment, VocabTheme::emissions};
  return v;
}

void SchemaProfile::validate() const {
  if (n_numeric < 1) throw ValidationError("profile needs at least one numeric column");
  if (n_rows < 5 || n_rows > 200) throw ValidationError("profile n_rows outside [5,200]");
  if (n_categorical < 1 && n_temporal < 1)
    throw ValidationError("profile needs a categorical or temporal column");
  if (n_categorical < 0 || n_temporal < 0) throw ValidationError("negative column count");
}

std::string to_string(AnchorRole r) {
  switch (r) {
    case AnchorRole::title: return "title";
    case AnchorRole::subtitle: return "subtitle";
    case AnchorRole::x_label: return "x_label";
    case AnchorRole::y_label: return "y_label";
    case AnchorRole::tick: return "tick";
    case AnchorRole::legend: return "legend";
  }
  return "tick";
}

// ------------------------------------------------------------- gen_table

Table gen_table(uint64_t seed, const SchemaProfile& profile) {
  profile.validate();
  const ThemeVocab& vocab = theme_vocab(profile.vocab_theme);
  uint64_t s = seed ^ fnv1a64("gen_table");
  Rng rng(splitmix64(s));

  Table table;
  table.id = hex_id('t', rng.next_u64());

  // column picks: rotate through the vocabulary, suffix on exhaustion
  auto pick_names = [&](const std::vector<std::string>& pool, int count) {
    std::vector<std::string> out;
    size_t offset = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(pool.size()) - 1));
    for (int i = 0; i < count; ++i) {
      size_t idx = (offset + static_cast<size_t>(i)) % pool.size();
      std::string name = pool[idx];
      size_t round = static_cast<size_t>(i) / pool.size();
      if (round > 0) name += "_" + std::to_string(round + 1);
      out.push_back(name);
    }
    return out;
  };

  std::vector<std::string> cat_names = pick_names(vocab.cat_names, profile.n_categorical);
  std::vector<std::string> temp_names = pick_names(vocab.temp_names, profile.n_temporal);
  std::vector<std::string> num_names = pick_names(vocab.num_names, profile.n_numeric);

  std::vector<size_t> cat_pool_idx;
  for (const auto& name : cat_names) {
    size_t idx = 0;
    for (size_t i = 0; i < vocab.cat_names.size(); ++i)
      if (name.rfind(vocab.cat_names[i], 0) == 0) idx = i;
    cat_pool_idx.push_back(idx);
  }

  for (const auto& n : cat_names) table.columns.push_back({n, ColumnKind::categorical});
  for (const auto& n : temp_names) table.columns.push_back({n, ColumnKind::temporal});
  for (const auto& n : num_names) table.columns.push_back({n, ColumnKind::numeric});

  const int n_rows = profile.n_rows;

  // temporal sequence: months for short tables, otherwise years
  bool use_months = n_rows <= 36 && rng.uniform() < 0.5;
  int start_year = static_cast<int>(rng.uniform_int(1980, 2019));
  auto temporal_value = [&](int step) {
    if (use_months) {
      int m = step % 12;
      int y = start_year + step / 12;
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%04d-%02d", y, m + 1);
      return std::string(buf);
    }
    return std::to_string(start_year + step);
  };

  // category cardinality per categorical column
  std::vector<int> cat_card;
  for (size_t c = 0; c < cat_names.size(); ++c) {
    int pool_size = static_cast<int>(vocab.cat_pools[cat_pool_idx[c]].size());
    cat_card.push_back(static_cast<int>(rng.uniform_int(3, std::min(pool_size, 8))));
  }

  auto cat_value = [&](size_t col, int idx) {
    const auto& pool = vocab.cat_pools[cat_pool_idx[col]];
    std::string v = pool[static_cast<size_t>(idx) % pool.size()];
    int round = idx / static_cast<int>(pool.size());
    if (round > 0) v += std::to_string(round + 1);
    return v;
  };

  // row structure: grid over (first categorical x time) when both exist,
  // otherwise cycle categories / advance time per row
  int k = cat_names.empty() ? 1 : cat_card[0];
  std::vector<std::vector<double>> numeric(num_names.size());
  for (auto& col : numeric) col = gen_numeric_series(rng, static_cast<size_t>(n_rows));

  for (int r = 0; r < n_rows; ++r) {
    std::vector<std::string> row;
    for (size_t c = 0; c < cat_names.size(); ++c) {
      int idx = (c == 0) ? (r % k) : ((r / std::max(1, k)) % cat_card[c]);
      row.push_back(cat_value(c, idx));
    }
    for (size_t tcol = 0; tcol < temp_names.size(); ++tcol) {
      int step = cat_names.empty() ? r : r / k;
      if (tcol > 0) step += static_cast<int>(tcol);
      row.push_back(temporal_value(step));
    }
    for (size_t ncol = 0; ncol < num_names.size(); ++ncol)
      row.push_back(format_cell(numeric[ncol][static_cast<size_t>(r)]));
    table.rows.push_back(std::move(row));
  }

  table.validate();
  return table;
}

// ------------------------------------------------------- recommend_charts

namespace {

struct ColRef {
  size_t idx;
  std::string name;
};

std::vector<ColRef> cols_of(const Table& t, ColumnKind kind) {
  std::vector<ColRef> out;
  for (size_t i = 0; i < t.columns.size(); ++i)
    if (t.columns[i].kind == kind) out.push_back({i, t.columns[i].name});
  return out;
}

// aggregate y per x in first-appearance order; mean=false sums duplicates
std::vector<SeriesPoint> aggregate(const Table& t, size_t x_col, size_t y_col, bool mean) {
  std::vector<std::string> order;
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& row : t.rows) {
    const std::string& x = row[x_col];
    double y = *parse_x_value(row[y_col]);
    auto it = acc.find(x);
    if (it == acc.end()) {
      order.push_back(x);
      acc[x] = {y, 1};
    } else {
      it->second.first += y;
      it->second.second += 1;
    }
  }
  std::vector<SeriesPoint> pts;
  for (const auto& x : order) {
    auto [sum, n] = acc[x];
    pts.push_back({x, mean ? sum / n : sum});
  }
  return pts;
}

void sort_by_x_numeric(std::vector<SeriesPoint>& pts) {
  std::stable_sort(pts.begin(), pts.end(), [](const SeriesPoint& a, const SeriesPoint& b) {
    auto va = parse_x_value(a.x), vb = parse_x_value(b.x);
    if (va && vb) return *va < *vb;
    return a.x < b.x;
  });
}

struct TitleContext {
  std::string adjective;
  std::string entity;
};

TitleContext title_context(const Table& t) {
  uint64_t h = fnv1a64(t.id);
  const auto& adj = adjective_pool();
  const auto& ent = entity_pool();
  return {adj[h % adj.size()], ent[(h >> 16) % ent.size()]};
}

}  // namespace

std::vector<ChartSpec> recommend_charts(const Table& table, int max_charts) {
  table.validate();
  if (max_charts < 1) return {};

  auto cats = cols_of(table, ColumnKind::categorical);
  auto temps = cols_of(table, ColumnKind::temporal);
  auto nums = cols_of(table, ColumnKind::numeric);

  TitleContext ctx = title_context(table);
  std::vector<ChartSpec> out;
  int counter = 0;

  auto push = [&](ChartSpec spec, const std::string& tag) {
    if (static_cast<int>(out.size()) >= max_charts) return;
    spec.id = hex_id('c', fnv1a64(table.id + ":" + tag + ":" + std::to_string(counter++)));
    spec.source_table_id = table.id;
    spec.style = StyleParams{};
    validate_chart(spec);
    out.push_back(std::move(spec));
  };

  auto qualify = [&](const std::string& body) {
    return capitalize(ctx.adjective) + " " + body + " for " + capitalize(ctx.entity);
  };

  // (categorical, numeric) -> bar, and pie when small and non-negative
  for (const auto& c : cats) {
    for (const auto& n : nums) {
      auto pts = aggregate(table, c.idx, n.idx, false);
      ChartSpec bar;
      bar.chart_type = ChartType::bar;
      bar.title = qualify(title_words(n.name) + " by " + title_words(c.name));
      bar.subtitle = "Totals across " + title_words(c.name) + " groups";
      bar.x_name = c.name;
      bar.y_name = n.name;
      bar.series.push_back({"", pts});
      push(bar, "bar:" + c.name + ":" + n.name);

      bool nonneg = std::all_of(pts.begin(), pts.end(),
                                [](const SeriesPoint& p) { return p.y >= 0.0; });
      double total = 0.0;
      for (const auto& p : pts) total += p.y;
      if (pts.size() <= 10 && nonneg && total > 0.0) {
        ChartSpec pie;
        pie.chart_type = ChartType::pie;
        pie.title = qualify("Share of " + title_words(n.name) + " by " + title_words(c.name));
        pie.subtitle = "";
        pie.x_name = c.name;
        pie.y_name = n.name;
        pie.series.push_back({"", pts});
        push(pie, "pie:" + c.name + ":" + n.name);
      }
    }
  }

  // (temporal, numeric) -> line
  for (const auto& t : temps) {
    for (const auto& n : nums) {
      auto pts = aggregate(table, t.idx, n.idx, true);
      sort_by_x_numeric(pts);
      ChartSpec line;
      line.chart_type = ChartType::line;
      line.title = qualify(title_words(n.name) + " over " + title_words(t.name));
      line.subtitle = "Development across the observed span";
      line.x_name = t.name;
      line.y_name = n.name;
      line.series.push_back({"", pts});
      push(line, "line:" + t.name + ":" + n.name);
    }
  }

  // (numeric, numeric) -> scatter
  for (size_t i = 0; i < nums.size(); ++i) {
    for (size_t j = i + 1; j < nums.size(); ++j) {
      std::vector<std::string> order;
      std::map<std::string, std::pair<double, int>> acc;
      for (const auto& row : table.rows) {
        const std::string& x = row[nums[i].idx];
        double y = *parse_x_value(row[nums[j].idx]);
        auto it = acc.find(x);
        if (it == acc.end()) {
          order.push_back(x);
          acc[x] = {y, 1};
        } else {
          it->second.first += y;
          it->second.second += 1;
        }
      }
      std::vector<SeriesPoint> pts;
      for (const auto& x : order) pts.push_back({x, acc[x].first / acc[x].second});
      sort_by_x_numeric(pts);
      if (pts.size() < 2) continue;
      ChartSpec sc;
      sc.chart_type = ChartType::scatter;
      sc.title = qualify(title_words(nums[j].name) + " versus " + title_words(nums[i].name));
      sc.subtitle = "";
      sc.x_name = nums[i].name;
      sc.y_name = nums[j].name;
      sc.series.push_back({"", pts});
      push(sc, "scatter:" + nums[i].name + ":" + nums[j].name);
    }
  }

  // (categorical, temporal, numeric) -> grouped_line
  if (!cats.empty() && !temps.empty()) {
    for (const auto& n : nums) {
      const auto& c = cats[0];
      const auto& t = temps[0];
      std::vector<std::string> cat_order;
      std::map<std::string, std::map<std::string, std::pair<double, int>>> acc;
      for (const auto& row : table.rows) {
        const std::string& cv = row[c.idx];
        if (!acc.count(cv)) cat_order.push_back(cv);
        auto& cell = acc[cv][row[t.idx]];
        cell.first += *parse_x_value(row[n.idx]);
        cell.second += 1;
      }
      ChartSpec gl;
      gl.chart_type = ChartType::grouped_line;
      gl.title = qualify(title_words(n.name) + " over " + title_words(t.name) + " by " +
                         title_words(c.name));
      gl.subtitle = "One series per " + title_words(c.name);
      gl.x_name = t.name;
      gl.y_name = n.name;
      for (const auto& cv : cat_order) {
        Series s;
        s.category = cv;
        for (const auto& [x, cell] : acc[cv]) s.points.push_back({x, cell.first / cell.second});
        sort_by_x_numeric(s.points);
        gl.series.push_back(std::move(s));
        gl.categories.push_back(cv);
      }
      push(gl, "grouped_line:" + n.name);
    }
  }

  // (two categorical, numeric) -> grouped_bar and stacked_bar
  if (cats.size() >= 2) {
    for (const auto& n : nums) {
      const auto& c1 = cats[0];
      const auto& c2 = cats[1];
      std::vector<std::string> x_order, cat_order;
      std::map<std::string, std::map<std::string, double>> acc;
      for (const auto& row : table.rows) {
        const std::string& xv = row[c1.idx];
        const std::string& cv = row[c2.idx];
        if (!acc.count(cv)) cat_order.push_back(cv);
        if (std::find(x_order.begin(), x_order.end(), xv) == x_order.end())
          x_order.push_back(xv);
        acc[cv][xv] += *parse_x_value(row[n.idx]);
      }
      auto make = [&](ChartType type, const std::string& tag, const std::string& title) {
        ChartSpec g;
        g.chart_type = type;
        g.title = title;
        g.subtitle = "Split by " + title_words(c2.name);
        g.x_name = c1.name;
        g.y_name = n.name;
        for (const auto& cv : cat_order) {
          Series s;
          s.category = cv;
          for (const auto& xv : x_order)
            if (acc[cv].count(xv)) s.points.push_back({xv, acc[cv][xv]});
          if (!s.points.empty()) {
            g.series.push_back(std::move(s));
            g.categories.push_back(cv);
          }
        }
        if (!g.series.empty()) push(g, tag);
      };
      std::string base = title_words(n.name) + " by " + title_words(c1.name) + " and " +
                         title_words(c2.name);
      make(ChartType::grouped_bar, "grouped_bar:" + n.name, qualify(base));
      make(ChartType::stacked_bar, "stacked_bar:" + n.name, qualify("Stacked " + base));
    }
  }

  return out;
}

// ------------------------------------------------------- randomize_style

StyleParams randomize_style(uint64_t seed, ChartType chart_type) {
  uint64_t s = seed ^ fnv1a64("style");
  Rng rng(splitmix64(s));
  StyleParams p;
  p.seed = seed;
  p.palette_id = static_cast<int>(rng.uniform_int(0, 7));
  bool line_family = chart_type == ChartType::line || chart_type == ChartType::grouped_line;
  bool scatter = chart_type == ChartType::scatter;
  if (line_family) {
    p.line_style = static_cast<LineStyle>(rng.uniform_int(0, 2));
    p.marker = static_cast<Marker>(rng.uniform_int(0, 3));
  } else if (scatter) {
    p.line_style = LineStyle::solid;
    p.marker = static_cast<Marker>(rng.uniform_int(0, 2));  // circle/square/triangle
  } else {
    p.line_style = LineStyle::solid;
    p.marker = Marker::none;
  }
  if (chart_type == ChartType::pie)
    p.pie_variant = rng.uniform() < 0.5 ? PieVariant::pie : PieVariant::donut;
  return p;
}

// -------------------------------------------------------------- geometry

double text_box_width(const std::string& text, double font_px) {
  return 0.58 * font_px * static_cast<double>(text.size());
}

namespace {

struct Scale {
  double lo = 0.0, hi = 1.0;
  double p0 = 0.0, p1 = 1.0;  // pixel range
  double operator()(double v) const {
    if (hi <= lo) return 0.5 * (p0 + p1);
    return p0 + (v - lo) / (hi - lo) * (p1 - p0);
  }
};

std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
  if (hi <= lo) return {lo};
  double span = hi - lo;
  double raw = span / target;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  double first = std::ceil(lo / step) * step;
  std::vector<double> out;
  for (double v = first; v <= hi + 1e-9 * span; v += step) out.push_back(v);
  return out;
}

std::string tick_label(double v) {
  if (v == 0.0) return "0";
  return format_sig4(v);
}

void add_text(RenderGeometry& g, const std::string& text, double cx, double cy,
              double font_px, AnchorRole role, char align = 'm') {
  if (text.empty()) return;
  g.texts.push_back({text, cx, cy, font_px, role, align});
}

void add_marker(RenderGeometry& g, Marker m, double x, double y, double r, int slot) {
  switch (m) {
    case Marker::circle:
      g.circles.push_back({x, y, r, slot, "marker"});
      break;
    case Marker::square:
      g.rects.push_back({x - r, y - r, 2 * r, 2 * r, slot, "marker"});
      break;
    case Marker::triangle:
      g.polys.push_back({{{x, y - r}, {x + r, y + r}, {x - r, y + r}}, slot, "marker"});
      break;
    case Marker::none:
      break;
  }
}

}  // namespace

RenderGeometry render_geometry(const ChartSpec& spec) {
  validate_chart(spec);
  RenderGeometry g;
  const StyleParams& st = spec.style;
  g.w = st.canvas_w;
  g.h = st.canvas_h;
  g.donut = spec.chart_type == ChartType::pie && st.pie_variant == PieVariant::donut;

  const double W = g.w, H = g.h;
  const double band = st.title_band_frac * H;
  const double mx = st.margin_frac * W;
  const double my = st.margin_frac * H;
  const double plot_x0 = mx, plot_x1 = W - mx;
  const double plot_y0 = band, plot_y1 = H - my;

  const double title_font = std::max(12.0, H * 0.045);
  const double sub_font = std::max(10.0, H * 0.030);
  const double axis_font = std::max(10.0, H * 0.032);
  const double tick_font = std::max(8.0, H * 0.026);

  add_text(g, spec.title, W / 2.0, band * 0.5, title_font, AnchorRole::title);
  if (!spec.subtitle.empty())
    add_text(g, spec.subtitle, W / 2.0, band * 0.85, sub_font, AnchorRole::subtitle);
  add_text(g, spec.x_name, W / 2.0, H - my * 0.35, axis_font, AnchorRole::x_label);
  add_text(g, spec.y_name, mx * 0.5, (plot_y0 + plot_y1) / 2.0, axis_font, AnchorRole::y_label);

  bool is_pie = spec.chart_type == ChartType::pie;

  if (!is_pie) {
    // frame
    g.segs.push_back({plot_x0, plot_y1, plot_x1, plot_y1, 1.5, LineStyle::solid, -1, "axis"});
    g.segs.push_back({plot_x0, plot_y0, plot_x0, plot_y1, 1.5, LineStyle::solid, -1, "axis"});
  }

  // value range over all series
  double ylo = 0.0, yhi = 0.0;
  bool first = true;
  bool include_zero = spec.chart_type != ChartType::scatter;
  bool stacked = spec.chart_type == ChartType::stacked_bar;
  if (stacked) {
    // stacking extends the range to the per-x signed totals
    std::map<std::string, double> pos, neg;
    for (const auto& s : spec.series)
      for (const auto& p : s.points)
        (p.y >= 0 ? pos[p.x] : neg[p.x]) += p.y;
    for (const auto& [x, v] : pos) yhi = std::max(yhi, v);
    for (const auto& [x, v] : neg) ylo = std::min(ylo, v);
    first = false;
  } else {
    for (const auto& s : spec.series)
      for (const auto& p : s.points) {
        if (first) {
          ylo = yhi = p.y;
          first = false;
        }
        ylo = std::min(ylo, p.y);
        yhi = std::max(yhi, p.y);
      }
  }
  if (include_zero) {
    ylo = std::min(ylo, 0.0);
    yhi = std::max(yhi, 0.0);
  }
  if (yhi <= ylo) yhi = ylo + 1.0;

  Scale ys{ylo, yhi, plot_y1, plot_y0};

  // legend for multi-series charts
  if (spec.series.size() > 1) {
    double lx = plot_x1 - 14.0;
    double ly = plot_y0 + 10.0;
    for (size_t i = 0; i < spec.series.size(); ++i) {
      g.rects.push_back({lx, ly - 5.0, 10.0, 10.0, static_cast<int>(i), "legend"});
      const std::string& label = spec.series[i].category;
      double wbox = text_box_width(label, tick_font);
      add_text(g, label, lx - 6.0 - wbox / 2.0, ly, tick_font, AnchorRole::legend, 'e');
      ly += 16.0;
    }
  }

  auto y_ticks = [&](const Scale& scale) {
    for (double v : nice_ticks(ylo, yhi)) {
      double py = scale(v);
      g.segs.push_back({plot_x0 - 4.0, py, plot_x0, py, 1.0, LineStyle::solid, -1, "tick"});
      std::string lbl = tick_label(v);
      double wbox = text_box_width(lbl, tick_font);
      add_text(g, lbl, plot_x0 - 7.0 - wbox / 2.0, py, tick_font, AnchorRole::tick, 'e');
    }
  };

  switch (spec.chart_type) {
    case ChartType::bar: {
      const auto& pts = spec.series[0].points;
      size_t n = pts.size();
      double slot = (plot_x1 - plot_x0) / static_cast<double>(n);
      double bw = slot * 0.7;
      double zero_y = ys(0.0);
      for (size_t i = 0; i < n; ++i) {
        double cx = plot_x0 + (static_cast<double>(i) + 0.5) * slot;
        double py = ys(pts[i].y);
        double top = std::min(py, zero_y), bot = std::max(py, zero_y);
        g.rects.push_back({cx - bw / 2.0, top, bw, std::max(1.0, bot - top), 0, "bar"});
        add_text(g, pts[i].x, cx, plot_y1 + my * 0.18, tick_font, AnchorRole::tick);
      }
      y_ticks(ys);
      break;
    }
    case ChartType::grouped_bar:
    case ChartType::stacked_bar: {
      // x slots from the union of x labels in first-series order
      std::vector<std::string> xs;
      for (const auto& s : spec.series)
        for (const auto& p : s.points)
          if (std::find(xs.begin(), xs.end(), p.x) == xs.end()) xs.push_back(p.x);
      size_t n = xs.size(), ks = spec.series.size();
      double slot = (plot_x1 - plot_x0) / static_cast<double>(n);
      double zero_y = ys(0.0);
      for (size_t i = 0; i < n; ++i) {
        double cx = plot_x0 + (static_cast<double>(i) + 0.5) * slot;
        add_text(g, xs[i], cx, plot_y1 + my * 0.18, tick_font, AnchorRole::tick);
        if (stacked) {
          double cum_pos = 0.0, cum_neg = 0.0;
          double bw = slot * 0.6;
          for (size_t si = 0; si < ks; ++si) {
            const auto& pts = spec.series[si].points;
            auto it = std::find_if(pts.begin(), pts.end(),
                                   [&](const SeriesPoint& p) { return p.x == xs[i]; });
            if (it == pts.end()) continue;
            double& cum = it->y >= 0 ? cum_pos : cum_neg;
            double y0 = ys(cum), y1p = ys(cum + it->y);
            cum += it->y;
            double top = std::min(y0, y1p), bot = std::max(y0, y1p);
            g.rects.push_back({cx - bw / 2.0, top, bw, std::max(1.0, bot - top),
                               static_cast<int>(si), "bar"});
          }
        } else {
          double group_w = slot * 0.8;
          double bw = group_w / static_cast<double>(ks);
          for (size_t si = 0; si < ks; ++si) {
            const auto& pts = spec.series[si].points;
            auto it = std::find_if(pts.begin(), pts.end(),
                                   [&](const SeriesPoint& p) { return p.x == xs[i]; });
            if (it == pts.end()) continue;
            double x0 = cx - group_w / 2.0 + static_cast<double>(si) * bw;
            double py = ys(it->y);
            double top = std::min(py, zero_y), bot = std::max(py, zero_y);
            g.rects.push_back({x0 + bw * 0.1, top, bw * 0.8, std::max(1.0, bot - top),
                               static_cast<int>(si), "bar"});
          }
        }
      }
      y_ticks(ys);
      break;
    }
    case ChartType::line:
    case ChartType::grouped_line:
    case ChartType::scatter: {
      // padded scale keeps markers and stroke inside the plot region
      Scale ysp{ylo, yhi, plot_y1 - 5.0, plot_y0 + 5.0};
      // numeric x positions when every label parses, ordinal otherwise
      std::vector<std::string> xs;
      for (const auto& s : spec.series)
        for (const auto& p : s.points)
          if (std::find(xs.begin(), xs.end(), p.x) == xs.end()) xs.push_back(p.x);
      bool numeric_x = std::all_of(xs.begin(), xs.end(), [](const std::string& x) {
        return parse_x_value(x).has_value();
      });
      double xlo = 0.0, xhi = 1.0;
      if (numeric_x) {
        bool f = true;
        for (const auto& x : xs) {
          double v = *parse_x_value(x);
          if (f) {
            xlo = xhi = v;
            f = false;
          }
          xlo = std::min(xlo, v);
          xhi = std::max(xhi, v);
        }
        if (xhi <= xlo) xhi = xlo + 1.0;
      } else {
        std::stable_sort(xs.begin(), xs.end());
        xhi = static_cast<double>(xs.size() - 1) + 1e-9;
      }
      Scale xsc{xlo, xhi, plot_x0 + 6.0, plot_x1 - 6.0};
      auto px_of = [&](const std::string& x) {
        if (numeric_x) return xsc(*parse_x_value(x));
        auto it = std::find(xs.begin(), xs.end(), x);
        return xsc(static_cast<double>(it - xs.begin()));
      };

      for (size_t si = 0; si < spec.series.size(); ++si) {
        const auto& pts = spec.series[si].points;
        int slot = static_cast<int>(si);
        if (spec.chart_type != ChartType::scatter) {
          for (size_t i = 1; i < pts.size(); ++i)
            g.segs.push_back({px_of(pts[i - 1].x), ysp(pts[i - 1].y), px_of(pts[i].x),
                              ysp(pts[i].y), 2.0, st.line_style, slot, "series"});
          for (const auto& p : pts) add_marker(g, st.marker, px_of(p.x), ysp(p.y), 3.5, slot);
        } else {
          Marker m = st.marker == Marker::none ? Marker::circle : st.marker;
          for (const auto& p : pts) add_marker(g, m, px_of(p.x), ysp(p.y), 3.0, slot);
        }
      }

      // x ticks: few representative labels
      size_t step = std::max<size_t>(1, xs.size() / 6);
      std::vector<std::string> shown;
      if (numeric_x) {
        std::vector<std::string> sorted_xs = xs;
        std::stable_sort(sorted_xs.begin(), sorted_xs.end(),
                         [](const std::string& a, const std::string& b) {
                           return *parse_x_value(a) < *parse_x_value(b);
                         });
        for (size_t i = 0; i < sorted_xs.size(); i += step) shown.push_back(sorted_xs[i]);
      } else {
        for (size_t i = 0; i < xs.size(); i += step) shown.push_back(xs[i]);
      }
      for (const auto& x : shown)
        add_text(g, x, px_of(x), plot_y1 + my * 0.18, tick_font, AnchorRole::tick);
      y_ticks(ysp);
      break;
    }
    case ChartType::pie: {
      const auto& pts = spec.series[0].points;
      double total = 0.0;
      for (const auto& p : pts) total += p.y;
      double cx = (plot_x0 + plot_x1) / 2.0;
      double cy = (plot_y0 + plot_y1) / 2.0;
      double R = 0.42 * std::min(plot_x1 - plot_x0, plot_y1 - plot_y0);
      double r_in = g.donut ? 0.45 * R : 0.0;
      if (total > 0.0) {
        double a = -kPi / 2.0;
        for (size_t i = 0; i < pts.size(); ++i) {
          double frac = pts[i].y / total;
          double a1 = a + frac * 2.0 * kPi;
          if (a1 > a)
            g.wedges.push_back({cx, cy, R, r_in, a, a1, static_cast<int>(i % 8)});
          a = a1;
        }
      }
      // slice labels as legend entries
      double lx = plot_x1 - 14.0;
      double ly = plot_y0 + 10.0;
      for (size_t i = 0; i < pts.size(); ++i) {
        g.rects.push_back({lx, ly - 5.0, 10.0, 10.0, static_cast<int>(i % 8), "legend"});
        double wbox = text_box_width(pts[i].x, tick_font);
        add_text(g, pts[i].x, lx - 6.0 - wbox / 2.0, ly, tick_font, AnchorRole::legend, 'e');
        ly += 16.0;
      }
      break;
    }
  }

  return g;
}

// ------------------------------------------------------------------ SVG

namespace {

const char* kPalettes[8][8] = {
    {"#4c78a8", "#f58518", "#e45756", "#72b7b2", "#54a24b", "#eeca3b", "#b279a2", "#ff9da6"},
    {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"},
    {"#386cb0", "#fdb462", "#7fc97f", "#ef3b2c", "#662506", "#a6cee3", "#fb9a99", "#984ea3"},
    {"#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5"},
    {"#003f5c", "#58508d", "#bc5090", "#ff6361", "#ffa600", "#488f31", "#de425b", "#69b3a2"},
    {"#264653", "#2a9d8f", "#e9c46a", "#f4a261", "#e76f51", "#606c38", "#283618", "#dda15e"},
    {"#606ff2", "#f25f5c", "#ffe066", "#247ba0", "#70c1b3", "#50514f", "#c05299", "#8bc34a"},
    {"#5778a4", "#e49444", "#d1615d", "#85b6b2", "#6a9f58", "#e7ca60", "#a87c9f", "#f1a2a9"},
};

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

const char* dash_of(LineStyle s) {
  switch (s) {
    case LineStyle::dashed: return "8 4";
    case LineStyle::dotted: return "2 3";
    default: return nullptr;
  }
}

}  // namespace

std::string render_svg(const ChartSpec& spec) {
  RenderGeometry g = render_geometry(spec);
  const char** palette = kPalettes[spec.style.palette_id % 8];
  auto color = [&](int slot) {
    return slot < 0 ? std::string("#333333") : std::string(palette[slot % 8]);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << g.w
      << "\" height=\"" << g.h << "\" viewBox=\"0 0 " << g.w << " " << g.h << "\">\n";

  for (const auto& s : g.segs) {
    svg << "<line class=\"" << s.cls << "\" x1=\"" << fmt(s.x1) << "\" y1=\"" << fmt(s.y1)
        << "\" x2=\"" << fmt(s.x2) << "\" y2=\"" << fmt(s.y2) << "\" stroke=\""
        << color(s.palette_slot) << "\" stroke-width=\"" << fmt(s.width) << "\"";
    if (const char* dash = dash_of(s.style)) svg << " stroke-dasharray=\"" << dash << "\"";
    svg << "/>\n";
  }

  for (const auto& r : g.rects)
    svg << "<rect class=\"" << r.cls << "\" x=\"" << fmt(r.x) << "\" y=\"" << fmt(r.y)
        << "\" width=\"" << fmt(r.w) << "\" height=\"" << fmt(r.h) << "\" fill=\""
        << color(r.palette_slot) << "\"/>\n";

  for (const auto& c : g.circles)
    svg << "<circle class=\"" << c.cls << "\" cx=\"" << fmt(c.cx) << "\" cy=\"" << fmt(c.cy)
        << "\" r=\"" << fmt(c.r) << "\" fill=\"" << color(c.palette_slot) << "\"/>\n";

  for (const auto& p : g.polys) {
    svg << "<path class=\"" << p.cls << "\" d=\"";
    for (size_t i = 0; i < p.pts.size(); ++i)
      svg << (i == 0 ? "M" : "L") << fmt(p.pts[i].first) << " " << fmt(p.pts[i].second);
    svg << "Z\" fill=\"" << color(p.palette_slot) << "\"/>\n";
  }

  if (!g.wedges.empty()) {
    svg << "<g class=\"wedges\">\n";
    for (const auto& w : g.wedges) {
      double x0 = w.cx + w.r_outer * std::cos(w.a0), y0 = w.cy + w.r_outer * std::sin(w.a0);
      double x1 = w.cx + w.r_outer * std::cos(w.a1), y1 = w.cy + w.r_outer * std::sin(w.a1);
      int large = (w.a1 - w.a0) > kPi ? 1 : 0;
      svg << "<path class=\"wedge\" d=\"M" << fmt(w.cx) << " " << fmt(w.cy) << "L" << fmt(x0)
          << " " << fmt(y0) << "A" << fmt(w.r_outer) << " " << fmt(w.r_outer) << " 0 " << large
          << " 1 " << fmt(x1) << " " << fmt(y1) << "Z\" fill=\"" << color(w.palette_slot)
          << "\"/>\n";
    }
    svg << "</g>\n";
    if (g.donut && !g.wedges.empty()) {
      const auto& w0 = g.wedges[0];
      double r = w0.r_inner;
      // hole disc drawn as two arc halves so it stays a path primitive
      svg << "<g class=\"hole\">\n<path class=\"hole\" d=\"M" << fmt(w0.cx - r) << " "
          << fmt(w0.cy) << "A" << fmt(r) << " " << fmt(r) << " 0 1 1 " << fmt(w0.cx + r) << " "
          << fmt(w0.cy) << "A" << fmt(r) << " " << fmt(r) << " 0 1 1 " << fmt(w0.cx - r) << " "
          << fmt(w0.cy) << "Z\" fill=\"#ffffff\"/>\n</g>\n";
    }
  }

  for (const auto& t : g.texts) {
    double x = t.cx;
    const char* anchor = "middle";
    if (t.align == 'e') {
      anchor = "end";
      x = t.cx + text_box_width(t.text, t.font_px) / 2.0;
    } else if (t.align == 's') {
      anchor = "start";
      x = t.cx - text_box_width(t.text, t.font_px) / 2.0;
    }
    svg << "<text class=\"" << to_string(t.role) << "\" x=\"" << fmt(x) << "\" y=\""
        << fmt(t.cy + t.font_px * 0.35) << "\" font-size=\"" << fmt(t.font_px)
        << "\" text-anchor=\"" << anchor << "\" fill=\"#222222\">" << xml_escape(t.text)
        << "</text>\n";
  }

  svg << "</svg>\n";
  return svg.str();
}

// ------------------------------------------------------------ rasterize

namespace {

class Raster {
 public:
  Raster(int w, int h) : w_(w), h_(h), acc_(static_cast<size_t>(w) * h, 0.0f) {}

  void add(int row, int col, double cov) {
    if (row < 0 || row >= h_ || col < 0 || col >= w_ || cov <= 0.0) return;
    acc_[static_cast<size_t>(row) * w_ + col] += static_cast<float>(cov);
  }

  // exact area coverage of an axis-aligned rectangle
  void rect(double x, double y, double w, double h) {
    if (w <= 0 || h <= 0) return;
    int c0 = std::max(0, static_cast<int>(std::floor(x)));
    int c1 = std::min(w_ - 1, static_cast<int>(std::ceil(x + w)) - 1);
    int r0 = std::max(0, static_cast<int>(std::floor(y)));
    int r1 = std::min(h_ - 1, static_cast<int>(std::ceil(y + h)) - 1);
    for (int r = r0; r <= r1; ++r) {
      double oy = std::min<double>(y + h, r + 1) - std::max<double>(y, r);
      if (oy <= 0) continue;
      for (int c = c0; c <= c1; ++c) {
        double ox = std::min<double>(x + w, c + 1) - std::max<double>(x, c);
        if (ox > 0) add(r, c, ox * oy);
      }
    }
  }

  // capsule around a segment, optionally dashed; 2x2 subsampled coverage
  void segment(const SegPrim& s) {
    double dx = s.x2 - s.x1, dy = s.y2 - s.y1;
    double len = std::hypot(dx, dy);
    double hw = std::max(0.5, s.width / 2.0);
    if (len < 1e-9) {
      disc(s.x1, s.y1, hw);
      return;
    }
    double ux = dx / len, uy = dy / len;
    auto dash_on = [&](double t) {
      switch (s.style) {
        case LineStyle::dashed: return std::fmod(t, 12.0) < 8.0;
        case LineStyle::dotted: return std::fmod(t, 5.0) < 2.0;
        default: return true;
      }
    };
    auto sample = [&](double px, double py) {
      double t = (px - s.x1) * ux + (py - s.y1) * uy;
      double tc = std::clamp(t, 0.0, len);
      double qx = s.x1 + tc * ux, qy = s.y1 + tc * uy;
      double d = std::hypot(px - qx, py - qy);
      return d <= hw && dash_on(tc);
    };
    double pad = hw + 1.0;
    if (std::fabs(dx) >= std::fabs(dy)) {
      int c0 = std::max(0, static_cast<int>(std::floor(std::min(s.x1, s.x2) - pad)));
      int c1 = std::min(w_ - 1, static_cast<int>(std::ceil(std::max(s.x1, s.x2) + pad)));
      for (int c = c0; c <= c1; ++c) {
        double t = (c + 0.5 - s.x1) * ux;  // approx param at column center
        double ycenter = s.y1 + std::clamp(t, 0.0, len) * uy;
        int r0 = std::max(0, static_cast<int>(std::floor(ycenter - pad - 1)));
        int r1 = std::min(h_ - 1, static_cast<int>(std::ceil(ycenter + pad + 1)));
        for (int r = r0; r <= r1; ++r) cell_subsample(r, c, sample);
      }
    } else {
      int r0 = std::max(0, static_cast<int>(std::floor(std::min(s.y1, s.y2) - pad)));
      int r1 = std::min(h_ - 1, static_cast<int>(std::ceil(std::max(s.y1, s.y2) + pad)));
      for (int r = r0; r <= r1; ++r) {
        double t = (r + 0.5 - s.y1) * uy;
        double xcenter = s.x1 + std::clamp(t, 0.0, len) * ux;
        int c0 = std::max(0, static_cast<int>(std::floor(xcenter - pad - 1)));
        int c1 = std::min(w_ - 1, static_cast<int>(std::ceil(xcenter + pad + 1)));
        for (int c = c0; c <= c1; ++c) cell_subsample(r, c, sample);
      }
    }
  }

  void disc(double cx, double cy, double r) {
    int c0 = std::max(0, static_cast<int>(std::floor(cx - r - 1)));
    int c1 = std::min(w_ - 1, static_cast<int>(std::ceil(cx + r + 1)));
    int r0 = std::max(0, static_cast<int>(std::floor(cy - r - 1)));
    int r1 = std::min(h_ - 1, static_cast<int>(std::ceil(cy + r + 1)));
    auto sample = [&](double px, double py) {
      return std::hypot(px - cx, py - cy) <= r;
    };
    for (int rr = r0; rr <= r1; ++rr)
      for (int cc = c0; cc <= c1; ++cc) cell_subsample(rr, cc, sample);
  }

  void poly(const PolyPrim& p) {
    double xlo = 1e18, xhi = -1e18, ylo = 1e18, yhi = -1e18;
    for (auto [x, y] : p.pts) {
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
    auto inside = [&](double px, double py) {
      bool in = false;
      size_t n = p.pts.size();
      for (size_t i = 0, j = n - 1; i < n; j = i++) {
        auto [xi, yi] = p.pts[i];
        auto [xj, yj] = p.pts[j];
        if ((yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi) in = !in;
      }
      return in;
    };
    int c0 = std::max(0, static_cast<int>(std::floor(xlo)));
    int c1 = std::min(w_ - 1, static_cast<int>(std::ceil(xhi)));
    int r0 = std::max(0, static_cast<int>(std::floor(ylo)));
    int r1 = std::min(h_ - 1, static_cast<int>(std::ceil(yhi)));
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c) cell_subsample(r, c, inside);
  }

  // all wedges of a pie in one bounding-box pass
  void wedges(const std::vector<WedgePrim>& ws) {
    if (ws.empty()) return;
    double cx = ws[0].cx, cy = ws[0].cy, R = ws[0].r_outer;
    auto sample = [&](double px, double py) {
      double dx = px - cx, dy = py - cy;
      double d = std::hypot(dx, dy);
      if (d > R) return false;
      double a = std::atan2(dy, dx);
      for (const auto& w : ws) {
        if (d < w.r_inner || d > w.r_outer) continue;
        double rel = a - w.a0;
        while (rel < 0) rel += 2.0 * kPi;
        if (rel <= w.a1 - w.a0) return true;
      }
      return false;
    };
    int c0 = std::max(0, static_cast<int>(std::floor(cx - R - 1)));
    int c1 = std::min(w_ - 1, static_cast<int>(std::ceil(cx + R + 1)));
    int r0 = std::max(0, static_cast<int>(std::floor(cy - R - 1)));
    int r1 = std::min(h_ - 1, static_cast<int>(std::ceil(cy + R + 1)));
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c) cell_subsample(r, c, sample);
  }

  std::vector<float> finish() {
    for (float& v : acc_) v = std::min(1.0f, std::max(0.0f, v));
    return std::move(acc_);
  }

 private:
  template <typename Pred>
  void cell_subsample(int row, int col, Pred inside) {
    static const double offs[2] = {0.25, 0.75};
    int hits = 0;
    for (double oy : offs)
      for (double ox : offs)
        if (inside(col + ox, row + oy)) ++hits;
    if (hits > 0) add(row, col, hits / 4.0);
  }

  int w_, h_;
  std::vector<float> acc_;
};

}  // namespace

PixelGrid rasterize_geometry(const RenderGeometry& g) {
  Raster raster(g.w, g.h);

  for (const auto& r : g.rects) raster.rect(r.x, r.y, r.w, r.h);
  for (const auto& s : g.segs) raster.segment(s);
  for (const auto& c : g.circles) raster.disc(c.cx, c.cy, c.r);
  for (const auto& p : g.polys) raster.poly(p);
  raster.wedges(g.wedges);
  for (const auto& t : g.texts) {
    double wbox = text_box_width(t.text, t.font_px);
    // glyph ink is a fraction of the box area
    double x0 = t.cx - wbox / 2.0, y0 = t.cy - t.font_px / 2.0;
    int c0 = std::max(0, static_cast<int>(std::floor(x0)));
    int c1 = std::min(g.w - 1, static_cast<int>(std::ceil(x0 + wbox)) - 1);
    int r0 = std::max(0, static_cast<int>(std::floor(y0)));
    int r1 = std::min(g.h - 1, static_cast<int>(std::ceil(y0 + t.font_px)) - 1);
    for (int r = r0; r <= r1; ++r) {
      double oy = std::min<double>(y0 + t.font_px, r + 1) - std::max<double>(y0, r);
      if (oy <= 0) continue;
      for (int c = c0; c <= c1; ++c) {
        double ox = std::min<double>(x0 + wbox, c + 1) - std::max<double>(x0, c);
        if (ox > 0) raster.add(r, c, 0.45 * ox * oy);
      }
    }
  }

  PixelGrid grid;
  grid.w = g.w;
  grid.h = g.h;
  grid.occupancy = raster.finish();
  for (const auto& t : g.texts) grid.text_anchors.push_back({t.text, t.cx, t.cy, t.role});
  return grid;
}

PixelGrid rasterize(const ChartSpec& spec) {
  return rasterize_geometry(render_geometry(spec));
}

// ----------------------------------------------------------- build_corpus

std::vector<ChartSpec> build_corpus(const CorpusConfig& cfg) {
  if (cfg.n_tables < 1) throw ValidationError("corpus needs at least one table");
  if (cfg.style_variants < 1) throw ValidationError("style_variants must be >= 1");

  uint64_t master = cfg.seed;
  std::vector<ChartSpec> charts;

  for (int ti = 0; ti < cfg.n_tables; ++ti) {
    if (cfg.target_charts > 0 && static_cast<int>(charts.size()) >= cfg.target_charts) break;
    uint64_t tseed = sub_seed(master, "table:" + std::to_string(ti));
    Rng prof_rng(sub_seed(master, "profile:" + std::to_string(ti)));

    SchemaProfile profile;
    profile.vocab_theme = all_themes()[static_cast<size_t>(
        prof_rng.uniform_int(0, static_cast<int64_t>(all_themes().size()) - 1))];
    int shape = static_cast<int>(prof_rng.uniform_int(0, 3));
    switch (shape) {
      case 0:  // categorical table
        profile.n_categorical = 1;
        profile.n_temporal = 0;
        profile.n_numeric = static_cast<int>(prof_rng.uniform_int(1, 2));
        profile.n_rows = static_cast<int>(prof_rng.uniform_int(5, 9));
        break;
      case 1:  // time series
        profile.n_categorical = 0;
        profile.n_temporal = 1;
        profile.n_numeric = static_cast<int>(prof_rng.uniform_int(1, 2));
        profile.n_rows = static_cast<int>(prof_rng.uniform_int(12, 36));
        break;
      case 2:  // grouped time series
        profile.n_categorical = 1;
        profile.n_temporal = 1;
        profile.n_numeric = 1;
        profile.n_rows = static_cast<int>(prof_rng.uniform_int(24, 60));
        break;
      default:  // two categoricals
        profile.n_categorical = 2;
        profile.n_temporal = 0;
        profile.n_numeric = 1;
        profile.n_rows = static_cast<int>(prof_rng.uniform_int(12, 40));
        break;
    }

    Table table = gen_table(tseed, profile);
    std::vector<ChartSpec> specs = recommend_charts(table, cfg.max_charts_per_table);

    for (const auto& base : specs) {
      for (int v = 0; v < cfg.style_variants; ++v) {
        if (cfg.target_charts > 0 && static_cast<int>(charts.size()) >= cfg.target_charts)
          break;
        ChartSpec chart = base;
        uint64_t vseed = sub_seed(master, base.id + ":variant:" + std::to_string(v));
        if (v > 0) {
          chart.id = hex_id('c', fnv1a64(base.id + ":v" + std::to_string(v)));
          if (cfg.variant_jitter > 0.0) {
            Rng jit(vseed);
            for (auto& s : chart.series)
              for (auto& p : s.points) {
                double eps = std::clamp(jit.normal(0.0, cfg.variant_jitter), -0.15, 0.15);
                p.y = std::round(p.y * (1.0 + eps) * 100.0) / 100.0;
              }
          }
        }
        chart.style = randomize_style(vseed, chart.chart_type);
        chart.svg_path = "svg/" + chart.id + ".svg";
        validate_chart(chart);
        charts.push_back(std::move(chart));
      }
    }
  }

  std::sort(charts.begin(), charts.end(),
            [](const ChartSpec& a, const ChartSpec& b) { return a.id < b.id; });
  return charts;
}

}  // namespace csem::synth
