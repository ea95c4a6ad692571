#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "csem/chartcore.hpp"

namespace csem::testutil {

// unique scratch directory, removed on destruction
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("csem_test_" + tag + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string str() const { return path_.string(); }
  std::filesystem::path path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline ChartSpec simple_bar(const std::string& id = "c_bar1") {
  ChartSpec c;
  c.id = id;
  c.chart_type = ChartType::bar;
  c.title = "Quarterly Revenue by Region for Meridian";
  c.subtitle = "Totals across region groups";
  c.x_name = "region";
  c.y_name = "revenue";
  c.series.push_back({"", {{"north", 120.0}, {"south", 80.0}, {"east", 95.5}}});
  c.source_table_id = "t_1";
  c.svg_path = "svg/" + id + ".svg";
  return c;
}

inline ChartSpec simple_line(const std::string& id = "c_line1") {
  ChartSpec c;
  c.id = id;
  c.chart_type = ChartType::line;
  c.title = "Annual Revenue over Year for Aurora";
  c.subtitle = "Development across the observed span";
  c.x_name = "year";
  c.y_name = "revenue";
  Series s;
  for (int y = 2018; y <= 2022; ++y)
    s.points.push_back({std::to_string(y), 100.0 + 10.0 * (y - 2018)});
  c.series.push_back(std::move(s));
  c.source_table_id = "t_2";
  c.svg_path = "svg/" + id + ".svg";
  return c;
}

inline ChartSpec simple_pie(const std::string& id = "c_pie1") {
  ChartSpec c;
  c.id = id;
  c.chart_type = ChartType::pie;
  c.title = "Share of Budget by Program for Beacon";
  c.x_name = "program";
  c.y_name = "budget";
  c.series.push_back({"", {{"outreach", 40.0}, {"training", 35.0}, {"upgrades", 25.0}}});
  c.source_table_id = "t_3";
  c.svg_path = "svg/" + id + ".svg";
  return c;
}

inline EmbeddingVector unit_vec(std::vector<double> values) {
  EmbeddingVector v;
  v.dim = static_cast<int>(values.size());
  v.values = std::move(values);
  v.normalize();
  return v;
}

}  // namespace csem::testutil
