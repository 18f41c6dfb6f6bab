#pragma once

#include <string>
#include <vector>

#include "knngate/experiments.hpp"

namespace knngate {

/// Versioned CSV column order; changing it is a schema break.
const std::vector<std::string>& report_csv_columns();

/// One row per cell, fixed column order, floats with 17 significant digits,
/// empty fields for metrics the experiment does not produce.
std::string report_to_csv(const ExperimentReport& report);

/// Nested JSON: run metadata, per-query analytic info, then cells.
std::string report_to_json(const ExperimentReport& report);

/// Minimal tabular view of a report CSV, used by the plot command.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Index of a column; throws std::invalid_argument on unknown names.
  std::size_t column_index(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);

}  // namespace knngate
