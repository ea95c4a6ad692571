#include "csem/statinsight.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "csem/http_client.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace csem::stat {

std::string to_string(Trend t) {
  switch (t) {
    case Trend::increasing: return "increasing";
    case Trend::decreasing: return "decreasing";
    case Trend::flat: return "flat";
  }
  return "flat";
}

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  size_t n = std::min(a.size(), b.size());
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va <= 0.0 || vb <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return cov / std::sqrt(va * vb);
}

// least-squares slope of y over x
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < n; ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return den <= 0.0 ? 0.0 : num / den;
}

}  // namespace

StatReport run_stat_tasks(const ChartSpec& spec) {
  validate_chart(spec);
  const Series& primary = spec.series[0];
  if (primary.points.size() < 2)
    throw ValidationError("chart " + spec.id + ": insufficient data for statistical tasks");

  StatReport r;
  const size_t n = primary.points.size();
  std::vector<double> ys(n), xs(n);
  bool numeric_x = true;
  for (size_t i = 0; i < n; ++i) {
    ys[i] = primary.points[i].y;
    auto xv = parse_x_value(primary.points[i].x);
    if (xv)
      xs[i] = *xv;
    else
      numeric_x = false;
  }
  if (!numeric_x)
    for (size_t i = 0; i < n; ++i) xs[i] = static_cast<double>(i);

  // trend with a dead band relative to the value scale
  r.slope = ls_slope(xs, ys);
  double scale = 0.0;
  for (double y : ys) scale = std::max(scale, std::fabs(y));
  if (std::fabs(r.slope) < 1e-9 * std::max(scale, 1e-300))
    r.trend = Trend::flat;
  else
    r.trend = r.slope > 0 ? Trend::increasing : Trend::decreasing;

  size_t imax = 0, imin = 0;
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (ys[i] > ys[imax]) imax = i;
    if (ys[i] < ys[imin]) imin = i;
    sum += ys[i];
  }
  r.argmax = primary.points[imax].x;
  r.max = ys[imax];
  r.argmin = primary.points[imin].x;
  r.min = ys[imin];
  r.range_lo = r.min;
  r.range_hi = r.max;
  r.mean = sum / static_cast<double>(n);

  std::vector<double> sorted = ys;
  std::sort(sorted.begin(), sorted.end());
  r.median = (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

  double var = 0.0, m3 = 0.0;
  for (double y : ys) {
    double d = y - r.mean;
    var += d * d;
    m3 += d * d * d;
  }
  var /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  r.stddev = std::sqrt(var);
  double skew_scale = std::pow(std::max(r.stddev, 1e-300), 3.0);
  if (std::fabs(m3) < 1e-9 * skew_scale)
    r.skew_sign = 0;
  else
    r.skew_sign = m3 > 0 ? 1 : -1;

  if (r.stddev > 0.0) {
    for (size_t i = 0; i < n; ++i) {
      double z = (ys[i] - r.mean) / r.stddev;
      if (std::fabs(z) >= 2.5) r.anomalies.push_back({static_cast<int>(i), z});
    }
  }

  // correlation: scatter pairs x with y; exactly two series pair their
  // y-values on shared x labels
  if (spec.chart_type == ChartType::scatter && numeric_x) {
    double c = pearson(xs, ys);
    if (std::isfinite(c)) r.correlation = std::clamp(c, -1.0, 1.0);
  } else if (spec.series.size() == 2) {
    std::vector<double> a, b;
    const Series& second = spec.series[1];
    for (const auto& p : primary.points) {
      auto it = std::find_if(second.points.begin(), second.points.end(),
                             [&](const SeriesPoint& q) { return q.x == p.x; });
      if (it != second.points.end()) {
        a.push_back(p.y);
        b.push_back(it->y);
      }
    }
    if (a.size() >= 2) {
      double c = pearson(a, b);
      if (std::isfinite(c)) r.correlation = std::clamp(c, -1.0, 1.0);
    }
  }

  // category values: series totals for multi-series, x-label values otherwise
  std::vector<std::pair<std::string, double>> cat_values;
  if (spec.series.size() > 1) {
    for (const auto& s : spec.series) {
      double total = 0.0;
      for (const auto& p : s.points) total += p.y;
      cat_values.push_back({s.category, total});
    }
  } else {
    for (const auto& p : primary.points) cat_values.push_back({p.x, p.y});
  }
  std::stable_sort(cat_values.begin(), cat_values.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (size_t i = 0; i < cat_values.size() && i < 3; ++i)
    r.top_categories.push_back(cat_values[i].first);

  double cat_sum = 0.0;
  for (const auto& [name, v] : cat_values) cat_sum += v;
  r.sum = cat_sum;
  r.share_of_top = (cat_sum > 0.0 && !cat_values.empty()) ? cat_values[0].second / cat_sum : 0.0;
  r.dominant_category = r.share_of_top >= 0.5;

  return r;
}

// -------------------------------------------------------------- prompts

namespace {

std::string categories_line(const ChartSpec& spec) {
  if (spec.categories.empty()) return "Single category";
  std::string out;
  for (size_t i = 0; i < spec.categories.size(); ++i) {
    if (i) out += ", ";
    out += spec.categories[i];
  }
  return out;
}

}  // namespace

PromptPair visual_prompt(const ChartSpec& spec) {
  PromptPair p;
  p.system =
      "You are an expert data visualization analyst who excels at crafting clear, "
      "engaging narratives.\nYour task is to write a fluid, well-structured paragraph "
      "that describes a data visualization.\nWrite as if explaining the visualization "
      "to a professional audience.";
  std::ostringstream u;
  u << "Based on the following chart information, write a single cohesive paragraph "
       "explaining the visualization:\n\n"
    << "Title: " << spec.title << "\n"
    << "Subtitle: " << spec.subtitle << "\n"
    << "Chart Type: " << chart_type_phrase(spec.chart_type) << "\n"
    << "X-axis: " << spec.x_name << "\n"
    << "Y-axis: " << spec.y_name << "\n"
    << "Categories: " << categories_line(spec) << "\n\n"
    << "Requirements:\n"
    << "- Begin with \"This " << chart_type_phrase(spec.chart_type) << " chart\"\n"
    << "- Naturally describe relationships between variables\n"
    << "- Use professional yet accessible language\n"
    << "- Approximately 100 words\n";
  p.user = u.str();
  return p;
}

PromptPair task_prompt(const ChartSpec& spec) {
  PromptPair p;
  p.system =
      "You are a professional data analyst. Describe the chart's purpose and practical "
      "applications.\n\nFormat strictly:\n\nMain Purpose:\n[Single paragraph of 50-100 "
      "words describing the visualization's core objective and data presentation "
      "approach. Avoid introductory phrases.]";
  std::ostringstream u;
  u << "Chart information:\n"
    << "Title: " << spec.title << "\n"
    << "Subtitle: " << spec.subtitle << "\n"
    << "Chart Type: " << chart_type_phrase(spec.chart_type) << "\n"
    << "X-axis Label: " << spec.x_name << "\n"
    << "Y-axis Label: " << spec.y_name << "\n"
    << "Data Categories: " << (spec.categories.empty() ? "None" : categories_line(spec))
    << "\n";
  p.user = u.str();
  return p;
}

PromptPair stats_prompt(const ChartSpec& spec, const std::string& stats_info) {
  PromptPair p;
  p.system =
      "You are an expert data analyst. Based on key statistical metrics, provide "
      "analysis.\n\nFormat strictly:\n\nStatistical Analysis:\n[Single paragraph of "
      "50-100 words analyzing ordering, relationships, ranges, and correlations. Avoid "
      "introductory phrases.]";
  std::ostringstream u;
  u << "Chart Information:\n"
    << "Title: " << spec.title << "\n"
    << "Chart Type: " << chart_type_phrase(spec.chart_type) << "\n"
    << "X-axis: " << spec.x_name << "\n"
    << "Y-axis: " << spec.y_name << "\n\n"
    << "Key Statistics:\n"
    << stats_info;
  p.user = u.str();
  return p;
}

std::string stats_info_text(const StatReport& r) {
  std::ostringstream s;
  s << "trend: " << to_string(r.trend) << " (slope " << format_sig4(r.slope) << ")\n"
    << "max: " << format_sig4(r.max) << " at " << r.argmax << "\n"
    << "min: " << format_sig4(r.min) << " at " << r.argmin << "\n"
    << "range: " << format_sig4(r.range_lo) << " to " << format_sig4(r.range_hi) << "\n"
    << "mean: " << format_sig4(r.mean) << ", median: " << format_sig4(r.median) << "\n"
    << "stddev: " << format_sig4(r.stddev) << "\n";
  if (r.correlation) s << "correlation: " << format_sig4(*r.correlation) << "\n";
  s << "anomalies: " << r.anomalies.size() << "\n";
  return s.str();
}

std::string generative_complete(const std::string& system_prompt,
                                const std::string& user_prompt,
                                const enc::EndpointConfig& cfg) {
  if (cfg.url.empty()) throw NetworkError("no generative endpoint configured");
  nlohmann::json body;
  body["model"] = cfg.model;
  body["messages"] = nlohmann::json::array(
      {{{"role", "system"}, {"content", system_prompt}},
       {{"role", "user"}, {"content", user_prompt}}});
  body["temperature"] = 0.7;
  nlohmann::json resp = detail::http_post_json(cfg.url, body, cfg.timeout_sec,
                                               cfg.max_retries);
  try {
    if (resp.contains("choices"))
      return resp["choices"].at(0).at("message").at("content").get<std::string>();
    if (resp.contains("text")) return resp["text"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw NetworkError(std::string("malformed completion response: ") + e.what());
  }
  throw NetworkError("completion response has neither 'choices' nor 'text'");
}

// ------------------------------------------------------------- templates

namespace {

std::string join_with_and(const std::vector<std::string>& items) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += (i + 1 == items.size()) ? " and " : " and ";
    out += items[i];
  }
  return out;
}

void pad_to_min_words(std::string& text, size_t min_words) {
  static const char* fillers[] = {
      "The layout keeps the title band and axis labels readable at a glance.",
      "Consistent scales make individual values easy to compare against each other.",
      "The rendering favors clarity so the underlying data stays the focus.",
  };
  size_t i = 0;
  while (word_count(text) < min_words && i < 3) {
    text += " ";
    text += fillers[i++];
  }
}

std::string try_generative(const PromptPair& prompts, const enc::EndpointConfig* endpoint,
                           std::string* out) {
  if (!endpoint || endpoint->url.empty()) return "template";
  try {
    *out = generative_complete(prompts.system, prompts.user, *endpoint);
    return out->empty() ? "template" : "generative";
  } catch (const NetworkError&) {
    return "template";  // mandatory fallback; the pipeline never blocks
  }
}

}  // namespace

Insight gen_visual_insight(const ChartSpec& spec, const enc::EndpointConfig* endpoint) {
  validate_chart(spec);
  Insight ins;
  ins.chart_id = spec.id;
  ins.level = InsightLevel::visual;

  std::string generated;
  if (try_generative(visual_prompt(spec), endpoint, &generated) == "generative") {
    ins.text = generated;
    ins.provenance = Provenance::generative_service;
    return ins;
  }

  const Series& primary = spec.series[0];
  std::ostringstream t;
  t << "This " << chart_type_phrase(spec.chart_type) << " chart titled " << spec.title
    << " presents " << spec.y_name << " against " << spec.x_name << ".";
  if (!spec.categories.empty())
    t << " It compares the series " << join_with_and(spec.categories) << ".";
  t << " The horizontal axis covers " << primary.points.size() << " positions from "
    << primary.points.front().x << " to " << primary.points.back().x << ".";
  double lo = primary.points[0].y, hi = lo;
  for (const auto& p : primary.points) {
    lo = std::min(lo, p.y);
    hi = std::max(hi, p.y);
  }
  t << " Observed " << spec.y_name << " values range from " << format_sig4(lo) << " to "
    << format_sig4(hi) << " across the chart.";
  ins.text = t.str();
  pad_to_min_words(ins.text, 30);
  ins.provenance = Provenance::template_gen;
  return ins;
}

Insight gen_task_insight(const ChartSpec& spec, const Insight& visual,
                         const enc::EndpointConfig* endpoint) {
  if (visual.chart_id != spec.id || visual.level != InsightLevel::visual)
    throw ValidationError("chart " + spec.id + ": task insight requires the chart's visual insight");
  Insight ins;
  ins.chart_id = spec.id;
  ins.level = InsightLevel::task;

  std::string generated;
  if (try_generative(task_prompt(spec), endpoint, &generated) == "generative") {
    ins.text = generated;
    ins.provenance = Provenance::generative_service;
    return ins;
  }

  std::string purpose, action;
  switch (spec.chart_type) {
    case ChartType::line:
    case ChartType::grouped_line:
      purpose = "monitoring trends over time and timing decisions";
      action = "watch how " + spec.y_name + " develops and react to turning points";
      break;
    case ChartType::pie:
      purpose = "allocation and share decision-making";
      action = "judge each slice's proportion of the total before committing resources";
      break;
    case ChartType::scatter:
      purpose = "relationship screening between paired measures";
      action = "check whether " + spec.y_name + " moves together with " + spec.x_name;
      break;
    default:  // bar families
      purpose = "ranking and comparison decisions";
      action = "compare groups side by side and rank them by " + spec.y_name;
      break;
  }

  std::ostringstream t;
  t << "Main Purpose: This " << chart_type_phrase(spec.chart_type) << " chart supports "
    << purpose << ". It helps an analyst working with " << spec.x_name << " and "
    << spec.y_name << " data to " << action << ". In the context of " << spec.title
    << " it turns raw records into a view that supports concrete choices.";
  ins.text = t.str();
  pad_to_min_words(ins.text, 30);
  ins.provenance = Provenance::template_gen;
  return ins;
}

Insight gen_stats_insight(const ChartSpec& spec, const StatReport& r,
                          const enc::EndpointConfig* endpoint) {
  Insight ins;
  ins.chart_id = spec.id;
  ins.level = InsightLevel::statistics;

  std::string generated;
  if (try_generative(stats_prompt(spec, stats_info_text(r)), endpoint, &generated) ==
      "generative") {
    ins.text = generated;
    ins.provenance = Provenance::generative_service;
    return ins;
  }

  std::ostringstream t;
  t << "Statistical Analysis: The " << spec.y_name << " series shows a " << to_string(r.trend)
    << " trend with slope " << format_sig4(r.slope) << " per step."
    << " The maximum value " << format_sig4(r.max) << " occurs at " << r.argmax
    << " while the minimum " << format_sig4(r.min) << " occurs at " << r.argmin << "."
    << " Values span the range " << format_sig4(r.range_lo) << " to "
    << format_sig4(r.range_hi) << " with mean " << format_sig4(r.mean) << " and median "
    << format_sig4(r.median) << ".";
  if (r.correlation) {
    double c = *r.correlation;
    std::string kind = c >= 0.05 ? "positive" : (c <= -0.05 ? "negative" : "negligible");
    t << " The paired measurements show a " << kind << " correlation of " << format_sig4(c)
      << ".";
  }
  if (!r.anomalies.empty())
    t << " The analysis flags " << r.anomalies.size()
      << " outlier value(s) beyond 2.5 standard deviations.";
  ins.text = t.str();
  pad_to_min_words(ins.text, 30);
  ins.provenance = Provenance::template_gen;
  return ins;
}

SynthesisResult synthesize_all(const std::vector<ChartSpec>& charts,
                               const enc::EndpointConfig* endpoint) {
  SynthesisResult result;
  const size_t n = charts.size();
  std::vector<std::array<Insight, 3>> per_chart(n);
  std::vector<std::string> errors(n);

  int threads = 0;  // 0: default team size
  if (endpoint && !endpoint->url.empty())
    threads = std::max(1, endpoint->max_in_flight);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (n > 8) num_threads(threads > 0 ? threads : omp_get_max_threads())
#endif
  for (size_t i = 0; i < n; ++i) {
    try {
      const ChartSpec& spec = charts[i];
      Insight visual = gen_visual_insight(spec, endpoint);
      StatReport report = run_stat_tasks(spec);
      Insight stats = gen_stats_insight(spec, report, endpoint);
      Insight task = gen_task_insight(spec, visual, endpoint);
      per_chart[i] = {visual, stats, task};
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }

  for (size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      result.skipped.push_back({charts[i].id, errors[i]});
      continue;
    }
    for (auto& ins : per_chart[i]) result.insights.push_back(std::move(ins));
  }
  return result;
}

}  // namespace csem::stat
