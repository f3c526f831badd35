#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace ls::harness {

struct CurvePoint {
  double step = 0.0;
  double value = 0.0;
};

/// A named curve. Steps must be strictly increasing.
struct CurveSeries {
  std::string name;
  std::vector<CurvePoint> points;
  std::size_t smoothing_window = 1;

  void validate() const;
  /// Trailing running mean over `smoothing_window` points.
  CurveSeries smoothed() const;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<CurveSeries> series;
  double width = 640.0;
  double height = 400.0;
  bool log_y = false;
};

/// Standalone SVG line chart. Output depends only on the inputs.
std::string render_svg(const ChartSpec& chart);
void write_svg(const std::filesystem::path& path, const ChartSpec& chart);

}  // namespace ls::harness
