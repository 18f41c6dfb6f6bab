#include "knngate/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace knngate {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string opt_mean(const Accumulator& acc) {
  return acc.count == 0 ? "" : fmt17(acc.mean());
}

std::string opt_sd(const Accumulator& acc) {
  return acc.count == 0 ? "" : fmt17(acc.stddev());
}

std::string opt_value(double v) { return std::isnan(v) ? "" : fmt17(v); }

nlohmann::json json_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

void put_metric(nlohmann::json& out, const char* mean_key, const char* sd_key,
                const Accumulator& acc) {
  if (acc.count == 0) return;
  out[mean_key] = acc.mean();
  out[sd_key] = acc.stddev();
}

}  // namespace

const std::vector<std::string>& report_csv_columns() {
  static const std::vector<std::string> columns = {
      "experiment",      "n",
      "k",               "query_index",
      "reps",            "mean_max_dev",
      "sd_max_dev",      "freq_mode_mismatch",
      "freq_dev_exceed", "freq_radius_exceed",
      "hoeffding_bound", "mean_wfact",
      "sd_wfact",        "mean_delta_h",
      "sd_delta_h",      "mean_delta_x",
      "sd_delta_x",      "freq_regime_a",
      "freq_regime_b",   "freq_regime_c",
      "freq_sign_agree", "mean_l1_gap",
      "sd_l1_gap",       "target",
  };
  return columns;
}

std::string report_to_csv(const ExperimentReport& report) {
  std::ostringstream out;
  const auto& columns = report_csv_columns();
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out << ',';
    out << columns[i];
  }
  out << '\n';
  const std::string name = experiment_name(report.kind);
  for (const CellStats& cell : report.cells) {
    out << name << ',' << cell.n << ',' << cell.k << ',' << cell.query_index
        << ',' << cell.reps << ',' << opt_mean(cell.max_dev) << ','
        << opt_sd(cell.max_dev) << ',' << opt_mean(cell.mode_mismatch) << ','
        << opt_mean(cell.dev_exceed) << ',' << opt_mean(cell.radius_exceed)
        << ',' << opt_value(cell.hoeffding) << ',' << opt_mean(cell.wfact)
        << ',' << opt_sd(cell.wfact) << ',' << opt_mean(cell.delta_h) << ','
        << opt_sd(cell.delta_h) << ',' << opt_mean(cell.delta_x) << ','
        << opt_sd(cell.delta_x) << ',' << opt_mean(cell.regime_a) << ','
        << opt_mean(cell.regime_b) << ',' << opt_mean(cell.regime_c) << ','
        << opt_mean(cell.sign_agree) << ',' << opt_mean(cell.l1_gap) << ','
        << opt_sd(cell.l1_gap) << ',' << opt_value(cell.target) << '\n';
  }
  return out.str();
}

std::string report_to_json(const ExperimentReport& report) {
  nlohmann::json root;
  root["schema_version"] = 1;
  root["experiment"] = experiment_name(report.kind);
  root["scenario"] = {{"hash", report.scenario_hash},
                      {"description", report.scenario_text}};
  root["master_seed"] = report.master_seed;
  root["num_labels"] = report.num_labels;
  root["reps"] = report.reps;
  root["zeta"] = report.zeta;
  root["delta"] = report.delta;
  root["bandwidth"] = report.bandwidth;

  nlohmann::json queries = nlohmann::json::array();
  for (std::size_t qi = 0; qi < report.queries.size(); ++qi) {
    const QueryInfo& info = report.queries[qi];
    nlohmann::json q;
    q["index"] = qi;
    q["point"] = info.point;
    q["gamma"] = json_or_null(info.gamma);
    q["ell_bayes"] = json_or_null(info.ell_bayes);
    q["ell0"] = json_or_null(info.ell0);
    q["lambda_inf"] = json_or_null(info.lambda_inf);
    q["support_distance"] = json_or_null(info.support_dist);
    q["target"] = json_or_null(info.target);
    if (!info.limit_dist.empty()) q["retriever_limit"] = info.limit_dist;
    queries.push_back(std::move(q));
  }
  root["queries"] = std::move(queries);

  nlohmann::json cells = nlohmann::json::array();
  for (const CellStats& cell : report.cells) {
    nlohmann::json c;
    c["n"] = cell.n;
    c["k"] = cell.k;
    c["query_index"] = cell.query_index;
    c["reps"] = cell.reps;
    put_metric(c, "mean_max_dev", "sd_max_dev", cell.max_dev);
    if (cell.mode_mismatch.count) {
      c["freq_mode_mismatch"] = cell.mode_mismatch.mean();
    }
    if (cell.dev_exceed.count) c["freq_dev_exceed"] = cell.dev_exceed.mean();
    if (cell.radius_exceed.count) {
      c["freq_radius_exceed"] = cell.radius_exceed.mean();
    }
    if (!std::isnan(cell.hoeffding)) c["hoeffding_bound"] = cell.hoeffding;
    put_metric(c, "mean_wfact", "sd_wfact", cell.wfact);
    put_metric(c, "mean_delta_h", "sd_delta_h", cell.delta_h);
    put_metric(c, "mean_delta_x", "sd_delta_x", cell.delta_x);
    if (cell.regime_a.count) c["freq_regime_a"] = cell.regime_a.mean();
    if (cell.regime_b.count) c["freq_regime_b"] = cell.regime_b.mean();
    if (cell.regime_c.count) c["freq_regime_c"] = cell.regime_c.mean();
    if (cell.sign_agree.count) c["freq_sign_agree"] = cell.sign_agree.mean();
    put_metric(c, "mean_l1_gap", "sd_l1_gap", cell.l1_gap);
    if (!std::isnan(cell.target)) c["target"] = cell.target;
    cells.push_back(std::move(c));
  }
  root["cells"] = std::move(cells);
  return root.dump(2) + "\n";
}

std::size_t CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw std::invalid_argument("unknown CSV column: " + name);
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (header) {
      table.columns = std::move(fields);
      header = false;
    } else {
      if (fields.size() != table.columns.size()) {
        throw std::invalid_argument("CSV row width does not match header");
      }
      table.rows.push_back(std::move(fields));
    }
  }
  if (table.columns.empty()) {
    throw std::invalid_argument("CSV has no header row");
  }
  return table;
}

}  // namespace knngate
