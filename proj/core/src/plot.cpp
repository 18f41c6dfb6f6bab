#include "knngate/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace knngate {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 700.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 430.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct Point {
  double n;
  double value;
};

}  // namespace

std::string default_plot_metric(const std::string& experiment) {
  if (experiment == "mode_stability") return "freq_mode_mismatch";
  if (experiment == "gate_limit") return "mean_delta_h";
  if (experiment == "trust_limit") return "mean_wfact";
  if (experiment == "retriever_limit") return "mean_l1_gap";
  throw std::invalid_argument("unknown experiment in report: " + experiment);
}

std::string render_report_svg(const CsvTable& table,
                              const std::string& metric) {
  if (table.rows.empty()) {
    throw std::runtime_error("report has no data rows to plot");
  }
  const std::size_t experiment_col = table.column_index("experiment");
  const std::size_t n_col = table.column_index("n");
  const std::size_t query_col = table.column_index("query_index");
  const std::size_t target_col = table.column_index("target");

  const std::string metric_name =
      metric.empty() ? default_plot_metric(table.rows.front()[experiment_col])
                     : metric;
  const std::size_t metric_col = table.column_index(metric_name);

  std::map<long, std::vector<Point>> series;   // query index -> points
  std::map<long, double> targets;              // query index -> target
  double y_min = kInfinity;
  double y_max = -kInfinity;
  double x_min = kInfinity;
  double x_max = -kInfinity;
  for (const auto& row : table.rows) {
    if (row[metric_col].empty()) continue;
    const long query = std::stol(row[query_col]);
    const double n = std::stod(row[n_col]);
    const double value = std::stod(row[metric_col]);
    series[query].push_back({n, value});
    y_min = std::min(y_min, value);
    y_max = std::max(y_max, value);
    x_min = std::min(x_min, n);
    x_max = std::max(x_max, n);
    if (!row[target_col].empty()) {
      const double target = std::stod(row[target_col]);
      targets[query] = target;
      y_min = std::min(y_min, target);
      y_max = std::max(y_max, target);
    }
  }
  if (series.empty()) {
    throw std::runtime_error("metric column `" + metric_name +
                             "` has no values to plot");
  }
  for (auto& [query, points] : series) {
    std::sort(points.begin(), points.end(),
              [](const Point& a, const Point& b) { return a.n < b.n; });
  }

  double lx_min = std::log10(x_min);
  double lx_max = std::log10(x_max);
  if (lx_max - lx_min < 1e-9) {
    lx_min -= 0.5;
    lx_max += 0.5;
  }
  double pad = 0.05 * (y_max - y_min);
  if (pad <= 0.0) pad = std::max(0.05, 0.1 * std::abs(y_max));
  y_min -= pad;
  y_max += pad;

  const auto sx = [&](double n) {
    return kLeft +
           (std::log10(n) - lx_min) / (lx_max - lx_min) * (kRight - kLeft);
  };
  const auto sy = [&](double v) {
    return kBottom - (v - y_min) / (y_max - y_min) * (kBottom - kTop);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << fmt((kLeft + kRight) / 2) << "\" y=\"22\" "
      << "text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
      << metric_name << " vs n (" << table.rows.front()[experiment_col]
      << ")</text>\n";

  // Axes.
  svg << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kBottom)
      << "\" x2=\"" << fmt(kRight) << "\" y2=\"" << fmt(kBottom)
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\""
      << fmt(kLeft) << "\" y2=\"" << fmt(kBottom) << "\" stroke=\"black\"/>\n";

  // Log-decade x ticks.
  for (int e = int(std::floor(lx_min)); e <= int(std::ceil(lx_max)); ++e) {
    const double lx = double(e);
    if (lx < lx_min - 1e-9 || lx > lx_max + 1e-9) continue;
    const double x = kLeft + (lx - lx_min) / (lx_max - lx_min) *
                                 (kRight - kLeft);
    svg << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(kBottom) << "\" x2=\""
        << fmt(x) << "\" y2=\"" << fmt(kBottom + 5) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(kBottom + 20)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\">1e"
        << e << "</text>\n";
  }
  svg << "<text x=\"" << fmt((kLeft + kRight) / 2) << "\" y=\""
      << fmt(kHeight - 12)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">n (log scale)</text>\n";

  // Five evenly spaced y ticks.
  for (int t = 0; t <= 4; ++t) {
    const double v = y_min + (y_max - y_min) * t / 4.0;
    const double y = sy(v);
    svg << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(y)
        << "\" x2=\"" << fmt(kLeft) << "\" y2=\"" << fmt(y)
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fmt(kLeft - 9) << "\" y=\"" << fmt(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"12\">"
        << fmt_label(v) << "</text>\n";
  }

  // Reference lines first so series draw on top.
  for (const auto& [query, target] : targets) {
    const char* color =
        kPalette[std::size_t(query) % (sizeof(kPalette) / sizeof(*kPalette))];
    const double y = sy(target);
    svg << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(y) << "\" x2=\""
        << fmt(kRight) << "\" y2=\"" << fmt(y) << "\" stroke=\"" << color
        << "\" stroke-dasharray=\"6,4\" opacity=\"0.7\"/>\n";
    svg << "<text x=\"" << fmt(kRight - 4) << "\" y=\"" << fmt(y - 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\""
        << " fill=\"" << color << "\">target " << fmt_label(target)
        << "</text>\n";
  }

  std::size_t color_index = 0;
  for (const auto& [query, points] : series) {
    const char* color =
        kPalette[std::size_t(query) % (sizeof(kPalette) / sizeof(*kPalette))];
    if (points.size() > 1) {
      svg << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (i) svg << ' ';
        svg << fmt(sx(points[i].n)) << ',' << fmt(sy(points[i].value));
      }
      svg << "\"/>\n";
    }
    for (const Point& p : points) {
      svg << "<circle cx=\"" << fmt(sx(p.n)) << "\" cy=\"" << fmt(sy(p.value))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    // Legend entry.
    const double ly = kTop + 16.0 * double(color_index);
    svg << "<rect x=\"" << fmt(kLeft + 8) << "\" y=\"" << fmt(ly)
        << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
    svg << "<text x=\"" << fmt(kLeft + 22) << "\" y=\"" << fmt(ly + 9)
        << "\" font-family=\"sans-serif\" font-size=\"12\">query " << query
        << "</text>\n";
    ++color_index;
  }

  svg << "</svg>\n";
  return svg.str();
}

}  // namespace knngate
