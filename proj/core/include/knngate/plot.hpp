#pragma once

#include <string>

#include "knngate/report_io.hpp"

namespace knngate {

/// Default plotted metric for each experiment's report.
std::string default_plot_metric(const std::string& experiment);

/// Render a report CSV as a self-contained SVG line chart: the metric versus
/// n on a log axis, one series per query, and a dashed horizontal reference
/// line wherever the report carries an analytic target. Throws
/// std::invalid_argument for an unknown metric column and std::runtime_error
/// for a report with no data rows.
std::string render_report_svg(const CsvTable& table,
                              const std::string& metric = "");

}  // namespace knngate
