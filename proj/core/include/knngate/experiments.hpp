#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "knngate/prob.hpp"
#include "knngate/scenario.hpp"

namespace knngate {

enum class ExperimentKind { ModeStability, GateLimit, TrustLimit,
                            RetrieverLimit };

std::string experiment_name(ExperimentKind kind);
ExperimentKind experiment_from_name(const std::string& name);

/// k grows as ceil(n^beta) with beta in (0, 1), which enforces k -> infinity
/// and k/n -> 0 along any diverging n grid.
struct KByPower {
  double beta = 0.6;
};
/// Explicit per-cell k values, paired positionally with the n grid.
using KRule = std::variant<KByPower, std::vector<std::size_t>>;

/// Full description of one Monte Carlo sweep. All randomness derives from
/// master_seed; identical configs produce bit-identical reports.
struct SweepConfig {
  Scenario scenario;
  std::vector<std::size_t> n_grid;
  KRule k_rule;
  std::size_t reps = 1;
  /// Explicit evaluation points; if empty, num_sampled_queries points are
  /// drawn from the scenario's query law instead.
  std::vector<std::vector<double>> queries;
  std::size_t num_sampled_queries = 0;
  double zeta = 0.0;
  double delta = 0.3;  // deviation threshold for the mode-stability bound
  double bandwidth = 1.0;
  std::uint64_t master_seed = 0;
};

/// Execution knobs that must not affect results.
struct RunOptions {
  std::size_t threads = 1;
};

/// Streaming mean/stddev accumulator carrying exact pooled sufficient
/// statistics (count, sum, sum of squares).
struct Accumulator {
  std::size_t count = 0;
  double sum = 0.0;
  double sumsq = 0.0;

  void add(double x) {
    ++count;
    sum += x;
    sumsq += x * x;
  }
  void merge(const Accumulator& other) {
    count += other.count;
    sum += other.sum;
    sumsq += other.sumsq;
  }
  double mean() const;
  double stddev() const;          // sample stddev, n - 1 denominator
  double standard_error() const;  // stddev / sqrt(count)
};

/// One per-query evaluation point with its analytic side information.
struct QueryInfo {
  std::vector<double> point;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double ell_bayes = std::numeric_limits<double>::quiet_NaN();
  double ell0 = std::numeric_limits<double>::quiet_NaN();
  double lambda_inf = std::numeric_limits<double>::quiet_NaN();
  double support_dist = std::numeric_limits<double>::quiet_NaN();
  double target = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> limit_dist;  // retriever-limit distribution, if any
};

/// Aggregated per-(n, k, query) statistics. Accumulators with count 0 mark
/// metrics the experiment does not produce.
struct CellStats {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t query_index = 0;
  std::size_t reps = 0;

  Accumulator max_dev;         // max_y |rhat_y - P(y|x)|
  Accumulator mode_mismatch;   // 1{y_r != y*}
  Accumulator dev_exceed;      // 1{max_dev > delta}
  Accumulator radius_exceed;   // 1{R_k > delta / (2 L)}
  Accumulator wfact;
  Accumulator delta_h;
  Accumulator delta_x;
  Accumulator regime_a;        // regime indicators
  Accumulator regime_b;
  Accumulator regime_c;
  Accumulator sign_agree;      // 1{sign delta_x == sign (P(y*) - q0(y*))}
  Accumulator l1_gap;          // |rhat - analytic limit|_1

  double hoeffding = std::numeric_limits<double>::quiet_NaN();
  double target = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentReport {
  ExperimentKind kind;
  std::string scenario_text;
  std::string scenario_hash;
  std::uint64_t master_seed = 0;
  std::size_t num_labels = 0;
  std::size_t reps = 0;
  double zeta = 0.0;
  double delta = 0.0;
  double bandwidth = 1.0;
  std::vector<QueryInfo> queries;
  std::vector<CellStats> cells;  // sorted by (n, k, query_index)
};

/// Concentration bound for the max-label deviation at threshold delta:
/// 2 C exp(-2 k (delta / 2)^2) plus the (empirically estimated) radius tail.
double hoeffding_bound(double delta, std::size_t k, std::size_t num_labels,
                       double radius_tail);

/// Resolve the k value for each n in the grid; every cell must give k < n.
std::vector<std::size_t> resolve_k_grid(const SweepConfig& config);

/// Per-cell retriever concentration and modal agreement against the Bayes
/// conditional. Requires an aligned scenario and in-support queries with a
/// positive Bayes margin.
ExperimentReport run_mode_stability(const SweepConfig& config,
                                    const RunOptions& options = {});

/// Realized discordance change under the optimal hard gate, with the
/// deterministic limit from the Bayes/base comparison as per-query target.
/// Requires an aligned scenario and nondegenerate queries
/// (gamma > 0, |ell_bayes - ell0| > 1e-6).
ExperimentReport run_gate_limit(const SweepConfig& config,
                                const RunOptions& options = {});

/// Trust-weight convergence toward exp(-d(x, S)^2).
ExperimentReport run_trust_limit(const SweepConfig& config,
                                 const RunOptions& options = {});

/// Retriever convergence toward the memory label law at the nearest support
/// point.
ExperimentReport run_retriever_limit(const SweepConfig& config,
                                     const RunOptions& options = {});

/// Dispatch by kind.
ExperimentReport run_experiment(ExperimentKind kind, const SweepConfig& config,
                                const RunOptions& options = {});

/// Pool replicate statistics from reports that share a grid schema (same
/// kind, scenario, queries, and cell keys). Exact in the sense of pooled
/// sufficient statistics.
ExperimentReport aggregate(const std::vector<ExperimentReport>& reports);

}  // namespace knngate
