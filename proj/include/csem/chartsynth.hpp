#pragma once

#include <string>
#include <vector>

#include "csem/chartcore.hpp"

namespace csem::synth {

enum class VocabTheme {
  sales, population, temperature, bookings, income, energy,
  traffic, ratings, inventory, budget, enrollment, emissions
};

std::string to_string(VocabTheme t);
VocabTheme vocab_theme_from(const std::string& s);
const std::vector<VocabTheme>& all_themes();

struct SchemaProfile {
  int n_categorical = 1;
  int n_numeric = 1;
  int n_temporal = 0;
  int n_rows = 20;
  VocabTheme vocab_theme = VocabTheme::sales;

  void validate() const;
};

enum class AnchorRole { title, subtitle, x_label, y_label, tick, legend };
std::string to_string(AnchorRole r);

struct TextAnchor {
  std::string text;
  double x = 0.0;  // center of the rendered text box
  double y = 0.0;
  AnchorRole role = AnchorRole::tick;
};

struct PixelGrid {
  int w = 0;
  int h = 0;
  std::vector<float> occupancy;  // row-major h*w, values in [0,1]
  std::vector<TextAnchor> text_anchors;

  float at(int row, int col) const { return occupancy[static_cast<size_t>(row) * w + col]; }
};

// Geometry emitted by the layout pass; render_svg and rasterize both consume
// it so the SVG and the occupancy grid always agree.
struct RectPrim {
  double x = 0, y = 0, w = 0, h = 0;
  int palette_slot = 0;
  std::string cls;
};

struct SegPrim {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  double width = 1.0;
  LineStyle style = LineStyle::solid;
  int palette_slot = -1;  // -1: frame color
  std::string cls;
};

struct CirclePrim {
  double cx = 0, cy = 0, r = 0;
  int palette_slot = 0;
  std::string cls;
};

struct PolyPrim {
  std::vector<std::pair<double, double>> pts;  // closed, filled
  int palette_slot = 0;
  std::string cls;
};

struct WedgePrim {
  double cx = 0, cy = 0;
  double r_outer = 0;
  double r_inner = 0;  // > 0 for donut
  double a0 = 0, a1 = 0;  // radians, a1 > a0
  int palette_slot = 0;
};

struct TextPrim {
  std::string text;
  double cx = 0, cy = 0;   // center of the text box
  double font_px = 12.0;
  AnchorRole role = AnchorRole::tick;
  char align = 'm';  // 'm' middle, 'e' end, 's' start (SVG text-anchor)
};

struct RenderGeometry {
  int w = 0, h = 0;
  bool donut = false;
  std::vector<RectPrim> rects;
  std::vector<SegPrim> segs;
  std::vector<CirclePrim> circles;
  std::vector<PolyPrim> polys;
  std::vector<WedgePrim> wedges;
  std::vector<TextPrim> texts;
};

// estimated width of a rendered text run; shared by layout and raster
double text_box_width(const std::string& text, double font_px);

Table gen_table(uint64_t seed, const SchemaProfile& profile);

std::vector<ChartSpec> recommend_charts(const Table& table, int max_charts);

StyleParams randomize_style(uint64_t seed, ChartType chart_type);

RenderGeometry render_geometry(const ChartSpec& spec);
std::string render_svg(const ChartSpec& spec);
PixelGrid rasterize_geometry(const RenderGeometry& g);
PixelGrid rasterize(const ChartSpec& spec);

// Corpus assembly: tables -> recommended charts -> per-spec similarity
// variants (fresh style, small multiplicative y jitter, new id). Variant
// clusters stand in for the near-duplicate charts a crawled repository
// contains naturally.
struct CorpusConfig {
  uint64_t seed = 1;
  int n_tables = 100;
  int max_charts_per_table = 3;
  int style_variants = 1;      // 1 = no siblings
  double variant_jitter = 0.03;
  int target_charts = 0;       // 0 = no cap; otherwise stop at this many
};

std::vector<ChartSpec> build_corpus(const CorpusConfig& cfg);

}  // namespace csem::synth
