#include "ls/harness/charts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace ls::harness {

void CurveSeries::validate() const {
  if (smoothing_window == 0) throw std::invalid_argument("curve '" + name + "': smoothing window must be positive");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].step > points[i - 1].step)) {
      throw std::invalid_argument("curve '" + name + "': steps must be strictly increasing");
    }
  }
}

CurveSeries CurveSeries::smoothed() const {
  validate();
  CurveSeries out{name, {}, 1};
  double sum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sum += points[i].value;
    if (i >= smoothing_window) sum -= points[i - smoothing_window].value;
    const auto n = static_cast<double>(std::min(i + 1, smoothing_window));
    out.points.push_back({points[i].step, sum / n});
  }
  return out;
}

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Roughly five round tick values covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) {
    ticks.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
  }
  return ticks;
}

}  // namespace

std::string render_svg(const ChartSpec& chart) {
  const double left = 70, right = 20, top = 40, bottom = 50;
  const double pw = chart.width - left - right, ph = chart.height - top - bottom;

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : chart.series) {
    s.validate();
    for (const auto& p : s.points) {
      if (!std::isfinite(p.value) || (chart.log_y && p.value <= 0.0)) continue;
      const double v = chart.log_y ? std::log10(p.value) : p.value;
      x0 = std::min(x0, p.step);
      x1 = std::max(x1, p.step);
      y0 = std::min(y0, v);
      y1 = std::max(y1, v);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(chart.width) + "\" height=\"" +
         fmt(chart.height) + "\" viewBox=\"0 0 " + fmt(chart.width) + " " + fmt(chart.height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(chart.width / 2) + "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">" + escape(chart.title) + "</text>\n";
  svg += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(pw) + "\" height=\"" + fmt(ph) +
         "\" fill=\"none\" stroke=\"#333\"/>\n";

  for (double t : nice_ticks(x0, x1)) {
    svg += "<line x1=\"" + fmt(sx(t)) + "\" y1=\"" + fmt(top + ph) + "\" x2=\"" + fmt(sx(t)) + "\" y2=\"" +
           fmt(top + ph + 5) + "\" stroke=\"#333\"/>\n";
    svg += "<text x=\"" + fmt(sx(t)) + "\" y=\"" + fmt(top + ph + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + tick_label(t) + "</text>\n";
  }
  for (double t : nice_ticks(y0, y1)) {
    svg += "<line x1=\"" + fmt(left - 5) + "\" y1=\"" + fmt(sy(t)) + "\" x2=\"" + fmt(left + pw) + "\" y2=\"" +
           fmt(sy(t)) + "\" stroke=\"#ddd\"/>\n";
    const double label = chart.log_y ? std::pow(10.0, t) : t;
    svg += "<text x=\"" + fmt(left - 8) + "\" y=\"" + fmt(sy(t) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + tick_label(label) + "</text>\n";
  }
  svg += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"" + fmt(chart.height - 10) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + escape(chart.x_label) +
         "</text>\n";
  svg += "<text x=\"16\" y=\"" + fmt(top + ph / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 16 " + fmt(top + ph / 2) + ")\">" + escape(chart.y_label) +
         "</text>\n";

  for (std::size_t i = 0; i < chart.series.size(); ++i) {
    const auto series = chart.series[i].smoothed();
    const char* color = kPalette[i % std::size(kPalette)];
    std::string path;
    for (const auto& p : series.points) {
      if (!std::isfinite(p.value) || (chart.log_y && p.value <= 0.0)) continue;
      const double v = chart.log_y ? std::log10(p.value) : p.value;
      path += (path.empty() ? "M" : " L") + fmt(sx(p.step)) + " " + fmt(sy(v));
    }
    if (!path.empty()) {
      svg += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
    }
    const double ly = top + 14 + 16 * static_cast<double>(i);
    svg += "<line x1=\"" + fmt(left + pw - 130) + "\" y1=\"" + fmt(ly - 4) + "\" x2=\"" + fmt(left + pw - 110) +
           "\" y2=\"" + fmt(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt(left + pw - 104) + "\" y=\"" + fmt(ly) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(chart.series[i].name) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void write_svg(const std::filesystem::path& path, const ChartSpec& chart) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << render_svg(chart);
}

}  // namespace ls::harness
