// knngate command-line front end.
//
// Subcommands:
//   gate      evaluate one query against a memory store and print the gate
//             decision and discordance record as JSON
//   simulate  run a configured Monte Carlo sweep, writing report.csv,
//             report.json, and manifest.json
//   plot      render a report CSV as an SVG convergence chart
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "knngate/config.hpp"
#include "knngate/discordance.hpp"
#include "knngate/gating.hpp"
#include "knngate/plot.hpp"
#include "knngate/report_io.hpp"
#include "knngate/retrieval.hpp"
#include "knngate/version.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::vector<double> parse_vector(const std::string& text,
                                 const std::string& what) {
  std::string normalized = text;
  for (char& c : normalized) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(normalized);
  std::vector<double> out;
  std::string token;
  while (in >> token) {
    std::size_t pos = 0;
    double value = 0.0;
    try {
      value = std::stod(token, &pos);
    } catch (...) {
      pos = 0;
    }
    if (pos != token.size()) {
      throw knngate::ConfigError(what + " has a non-numeric entry: " + token);
    }
    out.push_back(value);
  }
  if (out.empty()) throw knngate::ConfigError(what + " is empty");
  return out;
}

knngate::ProbVec parse_distribution(const std::string& text,
                                    std::size_t num_labels,
                                    const std::string& what) {
  if (text == "uniform") return knngate::ProbVec::uniform(num_labels);
  const std::vector<double> values = parse_vector(text, what);
  if (values.size() != num_labels) {
    throw knngate::ConfigError(what + " must have " +
                               std::to_string(num_labels) + " entries");
  }
  try {
    return knngate::ProbVec(values);
  } catch (const std::invalid_argument& e) {
    throw knngate::ConfigError(what + ": " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing: " + path);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int run_gate(const std::string& memory_path, const std::string& query_text,
             const std::string& p_true_text, const std::string& q0_text,
             std::size_t k, double zeta, double bandwidth,
             const std::string& mode, double tol, double smoothing) {
  const knngate::MemoryStore store = knngate::load_store_file(memory_path);
  const std::vector<double> query = parse_vector(query_text, "--query");
  if (query.size() != store.dim()) {
    throw knngate::ConfigError("--query must have " +
                               std::to_string(store.dim()) + " coordinates");
  }
  const knngate::ProbVec p_true =
      parse_distribution(p_true_text, store.num_labels(), "--p-true");
  const knngate::ProbVec q0 =
      parse_distribution(q0_text, store.num_labels(), "--q0");
  if (k < 1 || k > store.size()) {
    throw knngate::ConfigError("--k must satisfy 1 <= k <= n (k=" +
                               std::to_string(k) +
                               ", n=" + std::to_string(store.size()) + ")");
  }
  if (mode != "hard" && mode != "soft") {
    throw knngate::ConfigError("--mode must be hard or soft");
  }

  const knngate::RetrievalView view =
      knngate::retrieve(store, query, k, bandwidth);
  // Optional additive smoothing of the retriever distribution (default off:
  // smoothing removes the infinite-loss cases and with them the exact
  // hard-gate semantics).
  const knngate::ProbVec rhat =
      knngate::additive_smoothing(view.rhat, smoothing);
  const knngate::GateInputs inputs(p_true, q0, rhat, view.w_fact, zeta);
  const knngate::GateDecision decision = mode == "hard"
                                             ? knngate::hard_gate(inputs)
                                             : knngate::soft_gate(inputs, tol);
  const knngate::DiscordanceRecord record = knngate::realized_delta_h(inputs);

  // Doubles are emitted as 17-significant-digit strings so identical
  // invocations are byte-identical and nothing is lost to JSON rounding.
  nlohmann::json out;
  out["k"] = k;
  out["mode"] = mode;
  out["w_fact"] = fmt17(view.w_fact);
  out["radius"] = fmt17(view.radius);
  out["rhat"] = nlohmann::json::array();
  out["mixed"] = nlohmann::json::array();
  for (double v : rhat.values()) out["rhat"].push_back(fmt17(v));
  for (double v : decision.mixed.values()) out["mixed"].push_back(fmt17(v));
  out["lambda"] = fmt17(decision.lambda);
  out["ell0"] = fmt17(decision.ell0);
  out["ellr"] = fmt17(decision.ellr);
  out["penalty"] = fmt17(decision.penalty);
  out["y_r"] = record.y_r;
  out["h_q0"] = fmt17(record.h_q0);
  out["h_mixed"] = fmt17(record.h_mixed);
  out["delta_h"] = fmt17(record.delta_h);
  out["delta_x"] = fmt17(record.delta_x);
  out["regime"] = knngate::regime_name(record.regime);
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed_override,
                 std::size_t threads, const std::string& format) {
  if (format != "csv" && format != "json" && format != "both") {
    throw knngate::ConfigError("--format must be csv or json");
  }
  const std::string config_text = read_file(config_path);
  knngate::SimulationSpec spec = [&] {
    try {
      return knngate::parse_simulation_config(config_text);
    } catch (const knngate::ConfigError& e) {
      throw knngate::ConfigError(config_path + ": " + e.what());
    }
  }();
  if (seed_override) spec.sweep.master_seed = *seed_override;

  knngate::RunOptions options;
  options.threads = threads == 0
                        ? std::max(1u, std::thread::hardware_concurrency())
                        : threads;

  const auto started = std::chrono::system_clock::now();
  const knngate::ExperimentReport report =
      knngate::run_experiment(spec.kind, spec.sweep, options);
  const auto finished = std::chrono::system_clock::now();

  std::filesystem::create_directories(out_dir);
  const auto path = [&](const char* name) {
    return (std::filesystem::path(out_dir) / name).string();
  };
  if (format != "json") {
    write_file(path("report.csv"), knngate::report_to_csv(report));
  }
  if (format != "csv") {
    write_file(path("report.json"), knngate::report_to_json(report));
  }

  const std::vector<std::size_t> k_grid =
      knngate::resolve_k_grid(spec.sweep);
  nlohmann::json manifest;
  manifest["tool_version"] = knngate::kVersion;
  manifest["config_path"] = config_path;
  manifest["resolved_config"] = knngate::write_simulation_config(spec);
  manifest["experiment"] = knngate::experiment_name(spec.kind);
  manifest["scenario_hash"] = report.scenario_hash;
  manifest["master_seed"] = spec.sweep.master_seed;
  manifest["threads"] = options.threads;
  manifest["n_grid"] = spec.sweep.n_grid;
  manifest["k_grid"] = k_grid;
  manifest["outputs"] = nlohmann::json::array();
  if (format != "json") manifest["outputs"].push_back("report.csv");
  if (format != "csv") manifest["outputs"].push_back("report.json");
  manifest["wall_clock_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(finished - started)
          .count();
  manifest["started_at_unix_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(
          started.time_since_epoch())
          .count();
  write_file(path("manifest.json"), manifest.dump(2) + "\n");
  return 0;
}

int run_plot(const std::string& report_path, const std::string& out_path,
             const std::string& metric) {
  const knngate::CsvTable table = knngate::parse_csv(read_file(report_path));
  std::string svg;
  try {
    svg = knngate::render_report_svg(table, metric);
  } catch (const std::invalid_argument& e) {
    throw knngate::ConfigError(e.what());
  }
  write_file(out_path, svg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Laboratory for k-NN retrieval gating and discordance "
               "experiments"};
  app.set_version_flag("--version", knngate::kVersion);
  app.require_subcommand(1);

  // gate
  auto* gate = app.add_subcommand(
      "gate", "Evaluate the gate for one query against a memory store");
  std::string memory_path, query_text, p_true_text, q0_text;
  std::size_t k = 1;
  double zeta = 0.0, bandwidth = 1.0, tol = 1e-10, smoothing = 0.0;
  std::string mode = "hard";
  gate->add_option("--memory", memory_path, "Memory store file")->required();
  gate->add_option("--query", query_text, "Query coordinates, e.g. 0.3,0.1")
      ->required();
  gate->add_option("--p-true", p_true_text,
                   "True conditional over labels (list or `uniform`)")
      ->required();
  gate->add_option("--q0", q0_text,
                   "Base predictor over labels (list or `uniform`)")
      ->required();
  gate->add_option("--k", k, "Number of neighbors")->required();
  gate->add_option("--zeta", zeta, "Penalty strength (default 0)");
  gate->add_option("--bandwidth", bandwidth,
                   "Trust-weight bandwidth (default 1)");
  gate->add_option("--mode", mode, "hard or soft (default hard)");
  gate->add_option("--tol", tol, "Soft-gate tolerance (default 1e-10)");
  gate->add_option("--smoothing", smoothing,
                   "Additive smoothing of the retriever distribution "
                   "(default 0)");

  // simulate
  auto* simulate =
      app.add_subcommand("simulate", "Run a configured experiment sweep");
  std::string config_path, out_dir;
  std::uint64_t seed_value = 0;
  std::size_t threads = 1;
  std::string format = "both";
  simulate->add_option("--config", config_path, "Sweep configuration file")
      ->required();
  simulate->add_option("--out", out_dir, "Output directory")->required();
  auto* seed_opt = simulate->add_option(
      "--seed", seed_value, "Override the config's master_seed");
  simulate->add_option("--threads", threads,
                       "Worker threads (default 1; 0 = hardware)");
  simulate->add_option("--format", format,
                       "Report format: csv, json, or both (default)");

  // plot
  auto* plot = app.add_subcommand("plot", "Render a report CSV as SVG");
  std::string report_path, svg_path, metric;
  plot->add_option("--report", report_path, "report.csv from simulate")
      ->required();
  plot->add_option("--out", svg_path, "Output SVG path")->required();
  plot->add_option("--metric", metric,
                   "Metric column (default: per-experiment headline metric)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints the message or help text
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (gate->parsed()) {
      return run_gate(memory_path, query_text, p_true_text, q0_text, k, zeta,
                      bandwidth, mode, tol, smoothing);
    }
    if (simulate->parsed()) {
      std::optional<std::uint64_t> seed;
      if (seed_opt->count() > 0) seed = seed_value;
      return run_simulate(config_path, out_dir, seed, threads, format);
    }
    if (plot->parsed()) {
      return run_plot(report_path, svg_path, metric);
    }
  } catch (const knngate::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
