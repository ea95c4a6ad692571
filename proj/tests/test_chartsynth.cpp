#include <regex>
#include <set>

#include "csem/chartsynth.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace csem;
using namespace csem::synth;

namespace {

SchemaProfile profile(int cat, int num, int temp, int rows, VocabTheme theme) {
  SchemaProfile p;
  p.n_categorical = cat;
  p.n_numeric = num;
  p.n_temporal = temp;
  p.n_rows = rows;
  p.vocab_theme = theme;
  return p;
}

size_t count_occurrences(const std::string& hay, const std::string& needle) {
  size_t n = 0, pos = 0;
  while ((pos = hay.find(needle, pos)) != std::string::npos) {
    ++n;
    pos += needle.size();
  }
  return n;
}

}  // namespace

TEST_CASE("gen_table honors the profile and has no missing cells") {
  Table t = gen_table(1, profile(1, 1, 0, 10, VocabTheme::sales));
  CHECK(t.columns.size() == 2);
  CHECK(t.rows.size() == 10);
  CHECK(t.columns[0].kind == ColumnKind::categorical);
  CHECK(t.columns[1].kind == ColumnKind::numeric);
  for (const auto& row : t.rows)
    for (const auto& cell : row) CHECK_FALSE(cell.empty());
  CHECK_NOTHROW(t.validate());
}

TEST_CASE("gen_table is deterministic") {
  SchemaProfile p = profile(1, 2, 1, 24, VocabTheme::energy);
  Table a = gen_table(99, p);
  Table b = gen_table(99, p);
  CHECK(a.id == b.id);
  REQUIRE(a.rows.size() == b.rows.size());
  CHECK(a.rows == b.rows);
  Table c = gen_table(100, p);
  CHECK(a.id != c.id);
}

TEST_CASE("profile validation") {
  CHECK_THROWS_AS(gen_table(1, profile(1, 0, 0, 10, VocabTheme::sales)), ValidationError);
  CHECK_THROWS_AS(gen_table(1, profile(0, 1, 0, 10, VocabTheme::sales)), ValidationError);
  CHECK_THROWS_AS(gen_table(1, profile(1, 1, 0, 3, VocabTheme::sales)), ValidationError);
}

TEST_CASE("a thousand seeds give nearly all distinct titles") {
  std::set<std::string> titles;
  size_t total = 0;
  SchemaProfile p = profile(1, 1, 1, 12, VocabTheme::sales);
  for (uint64_t seed = 1; seed <= 1000; ++seed) {
    Table t = gen_table(seed, p);
    for (const auto& spec : recommend_charts(t, 4)) {
      titles.insert(spec.title);
      ++total;
    }
  }
  INFO("distinct=", titles.size(), " total=", total);
  CHECK(titles.size() >= 990);
}

TEST_CASE("recommendation rules fire by column kinds") {
  Table t;
  t.id = "t_line";
  t.columns = {{"month", ColumnKind::temporal}, {"revenue", ColumnKind::numeric}};
  for (int m = 1; m <= 12; ++m) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "2021-%02d", m);
    t.rows.push_back({buf, std::to_string(100 + m) + ".0"});
  }
  auto specs = recommend_charts(t, 8);
  bool has_line = false;
  for (const auto& s : specs)
    if (s.chart_type == ChartType::line && s.x_name == "month" && s.y_name == "revenue")
      has_line = true;
  CHECK(has_line);
}

TEST_CASE("pie respects the category cap") {
  Table t;
  t.id = "t_cap";
  t.columns = {{"region", ColumnKind::categorical}, {"count", ColumnKind::numeric}};
  for (int i = 0; i < 15; ++i)
    t.rows.push_back({"region" + std::to_string(i), std::to_string(i + 1) + ".0"});
  auto specs = recommend_charts(t, 8);
  bool has_bar = false, has_pie = false;
  for (const auto& s : specs) {
    if (s.chart_type == ChartType::bar) has_bar = true;
    if (s.chart_type == ChartType::pie) has_pie = true;
  }
  CHECK(has_bar);
  CHECK_FALSE(has_pie);
}

TEST_CASE("recommended charts satisfy core invariants and the count bound") {
  Rng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    SchemaProfile p;
    p.n_categorical = static_cast<int>(rng.uniform_int(0, 2));
    p.n_temporal = static_cast<int>(rng.uniform_int(0, 1));
    if (p.n_categorical == 0 && p.n_temporal == 0) p.n_categorical = 1;
    p.n_numeric = static_cast<int>(rng.uniform_int(1, 2));
    p.n_rows = static_cast<int>(rng.uniform_int(6, 40));
    p.vocab_theme = all_themes()[static_cast<size_t>(rng.uniform_int(0, 11))];
    Table t = gen_table(rng.next_u64(), p);
    auto specs = recommend_charts(t, 5);
    CHECK(specs.size() >= 1);
    CHECK(specs.size() <= 5);
    for (const auto& s : specs) CHECK_NOTHROW(validate_chart(s));
  }
}

TEST_CASE("style randomization is seeded and rule-bound") {
  StyleParams a = randomize_style(42, ChartType::line);
  StyleParams b = randomize_style(42, ChartType::line);
  CHECK(a.palette_id == b.palette_id);
  CHECK(a.line_style == b.line_style);
  CHECK(a.marker == b.marker);

  StyleParams pie = randomize_style(42, ChartType::pie);
  CHECK(pie.marker == Marker::none);
  CHECK(pie.line_style == LineStyle::solid);

  StyleParams bar = randomize_style(7, ChartType::bar);
  CHECK(bar.marker == Marker::none);
  CHECK(bar.pie_variant == PieVariant::pie);

  std::set<int> palettes;
  std::set<LineStyle> styles;
  std::set<PieVariant> variants;
  for (uint64_t s = 0; s < 100; ++s) {
    StyleParams sp = randomize_style(s, ChartType::line);
    palettes.insert(sp.palette_id);
    styles.insert(sp.line_style);
    variants.insert(randomize_style(s, ChartType::pie).pie_variant);
  }
  CHECK(palettes.size() >= 2);
  CHECK(styles.count(LineStyle::solid));
  CHECK(styles.count(LineStyle::dashed));
  CHECK(variants.size() == 2);
}

TEST_CASE("bar chart SVG has one rect per bar and the title exactly once") {
  ChartSpec bar = testutil::simple_bar();
  std::string svg = render_svg(bar);
  CHECK(count_occurrences(svg, "class=\"bar\"") == 3);
  CHECK(count_occurrences(svg, ">" + bar.title + "<") == 1);
  CHECK(count_occurrences(svg, "class=\"title\"") == 1);
  CHECK(render_svg(bar) == svg);  // deterministic bytes
}

TEST_CASE("donut renders wedges plus a hole disc as path groups") {
  ChartSpec pie = testutil::simple_pie();
  pie.style.pie_variant = PieVariant::donut;
  std::string svg = render_svg(pie);
  CHECK(count_occurrences(svg, "<g class=\"wedges\">") == 1);
  CHECK(count_occurrences(svg, "<g class=\"hole\">") == 1);
  CHECK(count_occurrences(svg, "class=\"wedge\"") == 3);

  pie.style.pie_variant = PieVariant::pie;
  std::string plain = render_svg(pie);
  CHECK(count_occurrences(plain, "<g class=\"hole\">") == 0);
}

TEST_CASE("SVG uses only the allowed primitives") {
  std::regex tag("<([A-Za-z]+)");
  const std::set<std::string> allowed = {"svg", "g", "rect", "line", "circle", "path", "text"};
  for (const ChartSpec& spec :
       {testutil::simple_bar(), testutil::simple_line(), testutil::simple_pie()}) {
    std::string svg = render_svg(spec);
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), tag);
         it != std::sregex_iterator(); ++it)
      CHECK(allowed.count((*it)[1].str()) == 1);
  }
}

TEST_CASE("rasterized geometry: zero outside primitives, saturated inside") {
  RenderGeometry g;
  g.w = 40;
  g.h = 30;
  PixelGrid blank = rasterize_geometry(g);
  for (float v : blank.occupancy) CHECK(v == 0.0f);

  g.rects.push_back({0, 0, 40, 30, 0, "bar"});  // full canvas
  PixelGrid full = rasterize_geometry(g);
  for (float v : full.occupancy) CHECK(v == 1.0f);
}

TEST_CASE("rasterize places anchors inside their layout bands") {
  ChartSpec bar = testutil::simple_bar();
  PixelGrid grid = rasterize(bar);
  REQUIRE(grid.w == 800);
  REQUIRE(grid.h == 500);
  bool saw_title = false, saw_y = false, saw_x = false;
  for (const auto& a : grid.text_anchors) {
    CHECK(a.x >= 0.0);
    CHECK(a.x < 800.0);
    CHECK(a.y >= 0.0);
    CHECK(a.y < 500.0);
    if (a.role == AnchorRole::title) {
      saw_title = true;
      CHECK(a.y < 0.08 * 500);
      CHECK(a.x == doctest::Approx(400.0));
    }
    if (a.role == AnchorRole::y_label) {
      saw_y = true;
      CHECK(a.x < 0.10 * 800);
    }
    if (a.role == AnchorRole::x_label) {
      saw_x = true;
      CHECK(a.y > 500 - 0.10 * 500);
    }
  }
  CHECK(saw_title);
  CHECK(saw_y);
  CHECK(saw_x);

  // corner of the title band holds no ink; bar interiors are saturated
  CHECK(grid.at(0, 0) == 0.0f);
  PixelGrid again = rasterize(bar);
  CHECK(grid.occupancy == again.occupancy);
}

TEST_CASE("data marks stay inside the plot region") {
  ChartSpec marked = testutil::simple_line("c_marked");
  marked.style.marker = Marker::circle;
  marked.style.line_style = LineStyle::dashed;
  for (const ChartSpec& spec : {testutil::simple_bar(), testutil::simple_line(), marked}) {
    RenderGeometry g = render_geometry(spec);
    const double x0 = 0.10 * g.w - 1e-6, x1 = 0.90 * g.w + 1e-6;
    const double y0 = 0.08 * g.h - 1e-6, y1 = 0.90 * g.h + 1e-6;
    for (const auto& r : g.rects) {
      if (r.cls != "bar") continue;
      CHECK(r.x >= x0);
      CHECK(r.x + r.w <= x1);
      CHECK(r.y >= y0);
      CHECK(r.y + r.h <= y1);
    }
    for (const auto& s : g.segs) {
      if (s.cls != "series") continue;
      CHECK(std::min(s.x1, s.x2) >= x0);
      CHECK(std::max(s.x1, s.x2) <= x1);
      CHECK(std::min(s.y1, s.y2) >= y0);
      CHECK(std::max(s.y1, s.y2) <= y1);
    }
    for (const auto& m : g.circles) {
      if (m.cls != "marker") continue;
      CHECK(m.cx - m.r >= x0);
      CHECK(m.cx + m.r <= x1);
      CHECK(m.cy - m.r >= y0);
      CHECK(m.cy + m.r <= y1);
    }
  }
}

TEST_CASE("build_corpus variants share content but differ in id and style seed") {
  CorpusConfig cc;
  cc.seed = 5;
  cc.n_tables = 4;
  cc.max_charts_per_table = 2;
  cc.style_variants = 3;
  auto charts = build_corpus(cc);
  CHECK(charts.size() >= 4u * 1u * 3u);

  std::set<std::string> ids;
  for (const auto& c : charts) CHECK(ids.insert(c.id).second);

  // variants of the same base spec keep the title
  std::map<std::string, int> by_title;
  for (const auto& c : charts) by_title[c.title + "|" + to_string(c.chart_type)]++;
  int clustered = 0;
  for (const auto& [t, n] : by_title)
    if (n >= 3) ++clustered;
  CHECK(clustered >= 1);

  auto charts2 = build_corpus(cc);
  REQUIRE(charts2.size() == charts.size());
  for (size_t i = 0; i < charts.size(); ++i) {
    CHECK(charts[i].id == charts2[i].id);
    CHECK(charts[i].style.seed == charts2[i].style.seed);
  }
}
