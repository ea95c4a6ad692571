#pragma once

#include <optional>
#include <string>
#include <vector>

#include "csem/chartcore.hpp"
#include "csem/encoder.hpp"

namespace csem::stat {

enum class Trend { increasing, decreasing, flat };
std::string to_string(Trend t);

// Results of the ten-task statistical battery over a chart's primary series
// (and series totals for grouped charts).
struct StatReport {
  Trend trend = Trend::flat;
  double slope = 0.0;
  std::string argmax;
  double max = 0.0;
  std::string argmin;
  double min = 0.0;
  double range_lo = 0.0;
  double range_hi = 0.0;
  double mean = 0.0;
  double median = 0.0;
  std::optional<double> correlation;          // scatter / exactly-two-series
  std::vector<std::pair<int, double>> anomalies;  // (index, z), |z| >= 2.5
  double stddev = 0.0;                        // population
  int skew_sign = 0;
  std::vector<std::string> top_categories;    // up to 3, by value desc
  double sum = 0.0;
  double share_of_top = 0.0;
  bool dominant_category = false;             // share_of_top >= 0.5
};

StatReport run_stat_tasks(const ChartSpec& spec);

Insight gen_visual_insight(const ChartSpec& spec,
                           const enc::EndpointConfig* endpoint = nullptr);
Insight gen_task_insight(const ChartSpec& spec, const Insight& visual,
                         const enc::EndpointConfig* endpoint = nullptr);
Insight gen_stats_insight(const ChartSpec& spec, const StatReport& report,
                          const enc::EndpointConfig* endpoint = nullptr);

// chat-completion shaped call: POST {model, messages, temperature}; returns
// the generated text or throws NetworkError after retries
std::string generative_complete(const std::string& system_prompt,
                                const std::string& user_prompt,
                                const enc::EndpointConfig& cfg);

struct PromptPair {
  std::string system;
  std::string user;
};

PromptPair visual_prompt(const ChartSpec& spec);
PromptPair task_prompt(const ChartSpec& spec);
PromptPair stats_prompt(const ChartSpec& spec, const std::string& stats_info);
std::string stats_info_text(const StatReport& report);

struct SynthesisResult {
  std::vector<Insight> insights;  // three per chart, level order
  std::vector<std::pair<std::string, std::string>> skipped;  // (chart_id, reason)
};

SynthesisResult synthesize_all(const std::vector<ChartSpec>& charts,
                               const enc::EndpointConfig* endpoint = nullptr);

}  // namespace csem::stat
