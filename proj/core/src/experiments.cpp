#include "knngate/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "knngate/discordance.hpp"
#include "knngate/gating.hpp"
#include "knngate/retrieval.hpp"

namespace knngate {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

double bayes_margin(const ProbVec& p) {
  const Label y_star = modal_label(p);
  double runner_up = 0.0;
  for (std::size_t i = 0; i < p.num_labels(); ++i) {
    if (i + 1 == y_star) continue;
    runner_up = std::max(runner_up, p[i]);
  }
  return p.at(y_star) - runner_up;
}

/// Everything about one evaluation point that is fixed across replicates.
struct QueryContext {
  explicit QueryContext(ProbVec p) : p_true(std::move(p)) {}

  std::vector<double> point;
  ProbVec p_true;
  Label y_star = 0;
  std::optional<ProbVec> q0;
  double radius_threshold = kNaN;  // delta / (2 L), mode stability
  double target_gap = kNaN;        // P(y*|x) - q0(y*|x), gate limit
  std::optional<ProbVec> limit;    // retriever-limit distribution
};

struct PerQueryMetrics {
  double max_dev = kNaN;
  double mode_mismatch = kNaN;
  double dev_exceed = kNaN;
  double radius_exceed = kNaN;
  double wfact = kNaN;
  double delta_h = kNaN;
  double delta_x = kNaN;
  double regime_a = kNaN;
  double regime_b = kNaN;
  double regime_c = kNaN;
  double sign_agree = kNaN;
  double l1_gap = kNaN;
};

void add_if_present(Accumulator& acc, double value) {
  if (!std::isnan(value)) acc.add(value);
}

std::vector<std::vector<double>> resolve_query_points(
    const SweepConfig& config) {
  if (!config.queries.empty()) {
    for (const auto& q : config.queries) {
      if (q.size() != config.scenario.dim()) {
        throw std::invalid_argument("query point dimension mismatch");
      }
    }
    return config.queries;
  }
  if (config.num_sampled_queries == 0) {
    throw std::invalid_argument(
        "config needs explicit queries or num_sampled_queries >= 1");
  }
  std::vector<std::vector<double>> points;
  points.reserve(config.num_sampled_queries);
  for (std::size_t i = 0; i < config.num_sampled_queries; ++i) {
    points.push_back(
        make_query(config.scenario,
                   derive_seed(config.master_seed, i, Stream::Query))
            .point);
  }
  return points;
}

void validate_common(const SweepConfig& config) {
  if (config.n_grid.empty()) {
    throw std::invalid_argument("n grid must be nonempty");
  }
  if (config.reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (!(config.bandwidth > 0.0)) {
    throw std::invalid_argument("bandwidth must be positive");
  }
  if (!(config.zeta >= 0.0)) throw std::invalid_argument("zeta must be >= 0");
}

PerQueryMetrics evaluate_query(ExperimentKind kind, const SweepConfig& config,
                               const QueryContext& ctx,
                               const MemoryStore& store, std::size_t k) {
  const NeighborSet neighbors = knn_query(store, ctx.point, k);
  const ProbVec rhat =
      retriever_distribution(neighbors, config.scenario.num_labels());
  PerQueryMetrics m;
  switch (kind) {
    case ExperimentKind::ModeStability: {
      double dev = 0.0;
      for (std::size_t i = 0; i < rhat.num_labels(); ++i) {
        dev = std::max(dev, std::abs(rhat[i] - ctx.p_true[i]));
      }
      m.max_dev = dev;
      m.mode_mismatch = modal_label(rhat) != ctx.y_star ? 1.0 : 0.0;
      m.dev_exceed = dev > config.delta ? 1.0 : 0.0;
      m.radius_exceed =
          knn_radius(neighbors) > ctx.radius_threshold ? 1.0 : 0.0;
      m.wfact = trust_weight(neighbors, config.bandwidth);
      break;
    }
    case ExperimentKind::GateLimit: {
      const double w = trust_weight(neighbors, config.bandwidth);
      const GateInputs inputs(ctx.p_true, *ctx.q0, rhat, w, config.zeta);
      const DiscordanceRecord record = realized_delta_h(inputs);
      m.wfact = w;
      m.delta_h = record.delta_h;
      m.delta_x = record.delta_x;
      m.regime_a = record.regime == Regime::A ? 1.0 : 0.0;
      m.regime_b = record.regime == Regime::B ? 1.0 : 0.0;
      m.regime_c = record.regime == Regime::C ? 1.0 : 0.0;
      m.sign_agree =
          sign_of(record.delta_x) == sign_of(ctx.target_gap) ? 1.0 : 0.0;
      break;
    }
    case ExperimentKind::TrustLimit: {
      m.wfact = trust_weight(neighbors, config.bandwidth);
      break;
    }
    case ExperimentKind::RetrieverLimit: {
      m.l1_gap = l1_distance(rhat, *ctx.limit);
      break;
    }
  }
  return m;
}

ExperimentReport run_sweep(ExperimentKind kind, const SweepConfig& config,
                           std::vector<QueryContext> contexts,
                           const RunOptions& options) {
  const std::vector<std::size_t> k_grid = resolve_k_grid(config);
  const std::size_t num_cells = config.n_grid.size();
  const std::size_t num_queries = contexts.size();
  const std::size_t num_tasks = num_cells * config.reps;

  // Each (cell, replicate) task owns a slot; results are folded afterwards
  // in a fixed order, so the parallel schedule cannot affect the report.
  std::vector<std::vector<PerQueryMetrics>> results(num_tasks);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  const auto worker = [&]() {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= num_tasks) return;
      try {
        const std::size_t cell = task / config.reps;
        const std::size_t rep = task % config.reps;
        const std::uint64_t seed =
            derive_seed(config.master_seed,
                        (std::uint64_t(cell) << 32) | std::uint64_t(rep),
                        Stream::Memory);
        const MemoryStore store =
            sample_memory(config.scenario, config.n_grid[cell], seed);
        std::vector<PerQueryMetrics> row(num_queries);
        for (std::size_t qi = 0; qi < num_queries; ++qi) {
          row[qi] = evaluate_query(kind, config, contexts[qi], store,
                                   k_grid[cell]);
        }
        results[task] = std::move(row);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const std::size_t threads =
      std::max<std::size_t>(1, std::min(options.threads, num_tasks));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  std::vector<CellStats> cells(num_cells * num_queries);
  for (std::size_t cell = 0; cell < num_cells; ++cell) {
    for (std::size_t qi = 0; qi < num_queries; ++qi) {
      CellStats& stats = cells[cell * num_queries + qi];
      stats.n = config.n_grid[cell];
      stats.k = k_grid[cell];
      stats.query_index = qi;
      stats.reps = config.reps;
      for (std::size_t rep = 0; rep < config.reps; ++rep) {
        const PerQueryMetrics& m = results[cell * config.reps + rep][qi];
        add_if_present(stats.max_dev, m.max_dev);
        add_if_present(stats.mode_mismatch, m.mode_mismatch);
        add_if_present(stats.dev_exceed, m.dev_exceed);
        add_if_present(stats.radius_exceed, m.radius_exceed);
        add_if_present(stats.wfact, m.wfact);
        add_if_present(stats.delta_h, m.delta_h);
        add_if_present(stats.delta_x, m.delta_x);
        add_if_present(stats.regime_a, m.regime_a);
        add_if_present(stats.regime_b, m.regime_b);
        add_if_present(stats.regime_c, m.regime_c);
        add_if_present(stats.sign_agree, m.sign_agree);
        add_if_present(stats.l1_gap, m.l1_gap);
      }
    }
  }

  ExperimentReport report;
  report.kind = kind;
  report.scenario_text = scenario_description(config.scenario);
  report.scenario_hash = scenario_hash(config.scenario);
  report.master_seed = config.master_seed;
  report.num_labels = config.scenario.num_labels();
  report.reps = config.reps;
  report.zeta = config.zeta;
  report.delta = config.delta;
  report.bandwidth = config.bandwidth;

  report.queries.reserve(num_queries);
  for (const QueryContext& ctx : contexts) {
    QueryInfo info;
    info.point = ctx.point;
    info.gamma = bayes_margin(ctx.p_true);
    info.support_dist =
        support_distance(config.scenario, ctx.point).distance;
    if (kind == ExperimentKind::GateLimit) {
      const AsymptoticTarget target = asymptotic_target(ctx.p_true, *ctx.q0);
      info.ell_bayes = target.ell_bayes;
      info.ell0 = target.ell0;
      info.lambda_inf = target.lambda_inf;
      info.target = target.limit_value;
    } else if (kind == ExperimentKind::TrustLimit) {
      info.target = trust_limit(config.scenario, ctx.point);
    } else if (kind == ExperimentKind::RetrieverLimit) {
      info.target = 0.0;  // the tracked metric is the L1 gap to the limit
      info.limit_dist = ctx.limit->values();
    }
    report.queries.push_back(std::move(info));
  }

  for (CellStats& stats : cells) {
    if (kind == ExperimentKind::ModeStability) {
      stats.hoeffding =
          hoeffding_bound(config.delta, stats.k,
                          config.scenario.num_labels(),
                          stats.radius_exceed.mean());
    } else {
      stats.target = report.queries[stats.query_index].target;
    }
  }

  std::stable_sort(cells.begin(), cells.end(),
                   [](const CellStats& a, const CellStats& b) {
                     if (a.n != b.n) return a.n < b.n;
                     if (a.k != b.k) return a.k < b.k;
                     return a.query_index < b.query_index;
                   });
  report.cells = std::move(cells);
  return report;
}

}  // namespace

std::string experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::ModeStability: return "mode_stability";
    case ExperimentKind::GateLimit: return "gate_limit";
    case ExperimentKind::TrustLimit: return "trust_limit";
    case ExperimentKind::RetrieverLimit: return "retriever_limit";
  }
  throw std::invalid_argument("unknown experiment kind");
}

ExperimentKind experiment_from_name(const std::string& name) {
  if (name == "mode_stability") return ExperimentKind::ModeStability;
  if (name == "gate_limit") return ExperimentKind::GateLimit;
  if (name == "trust_limit") return ExperimentKind::TrustLimit;
  if (name == "retriever_limit") return ExperimentKind::RetrieverLimit;
  throw std::invalid_argument("unknown experiment name: " + name);
}

double Accumulator::mean() const {
  return count == 0 ? kNaN : sum / double(count);
}

double Accumulator::stddev() const {
  if (count < 2) return count == 0 ? kNaN : 0.0;
  const double m = mean();
  const double var =
      std::max(0.0, (sumsq - double(count) * m * m) / double(count - 1));
  return std::sqrt(var);
}

double Accumulator::standard_error() const {
  if (count == 0) return kNaN;
  return stddev() / std::sqrt(double(count));
}

double hoeffding_bound(double delta, std::size_t k, std::size_t num_labels,
                       double radius_tail) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }
  if (!(radius_tail >= 0.0 && radius_tail <= 1.0)) {
    throw std::invalid_argument("radius tail must lie in [0, 1]");
  }
  const double half = delta / 2.0;
  return 2.0 * double(num_labels) * std::exp(-2.0 * double(k) * half * half) +
         radius_tail;
}

std::vector<std::size_t> resolve_k_grid(const SweepConfig& config) {
  std::vector<std::size_t> k_grid;
  if (const auto* power = std::get_if<KByPower>(&config.k_rule)) {
    if (!(power->beta > 0.0 && power->beta < 1.0)) {
      throw std::invalid_argument("k exponent beta must lie in (0, 1)");
    }
    k_grid.reserve(config.n_grid.size());
    for (std::size_t n : config.n_grid) {
      k_grid.push_back(std::size_t(
          std::ceil(std::pow(double(n), power->beta))));
    }
  } else {
    k_grid = std::get<std::vector<std::size_t>>(config.k_rule);
    if (k_grid.size() != config.n_grid.size()) {
      throw std::invalid_argument("explicit k grid must match the n grid");
    }
  }
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    if (k_grid[i] < 1 || k_grid[i] >= config.n_grid[i]) {
      throw std::invalid_argument(
          "every cell must satisfy 1 <= k < n (cell " + std::to_string(i) +
          " has k=" + std::to_string(k_grid[i]) +
          ", n=" + std::to_string(config.n_grid[i]) + ")");
    }
  }
  return k_grid;
}

ExperimentReport run_mode_stability(const SweepConfig& config,
                                    const RunOptions& options) {
  validate_common(config);
  if (!(config.delta > 0.0 && config.delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }
  if (!config.scenario.aligned()) {
    throw std::invalid_argument(
        "mode stability requires an aligned scenario (no deformation, rho=0)");
  }
  std::vector<QueryContext> contexts;
  for (auto& point : resolve_query_points(config)) {
    QueryContext ctx(conditional_at(config.scenario, point));
    ctx.point = std::move(point);
    if (!(bayes_margin(ctx.p_true) > 0.0)) {
      throw std::invalid_argument(
          "mode stability query has zero Bayes margin");
    }
    if (support_distance(config.scenario, ctx.point).distance > 0.0) {
      throw std::invalid_argument("mode stability query is off-support");
    }
    ctx.y_star = modal_label(ctx.p_true);
    ctx.radius_threshold =
        config.delta / (2.0 * config.scenario.lipschitz());
    contexts.push_back(std::move(ctx));
  }
  return run_sweep(ExperimentKind::ModeStability, config, std::move(contexts),
                   options);
}

ExperimentReport run_gate_limit(const SweepConfig& config,
                                const RunOptions& options) {
  validate_common(config);
  if (!config.scenario.aligned()) {
    throw std::invalid_argument(
        "gate limit requires an aligned scenario (no deformation, rho=0)");
  }
  std::vector<QueryContext> contexts;
  for (auto& point : resolve_query_points(config)) {
    QueryContext ctx(conditional_at(config.scenario, point));
    ctx.q0 = q0_at(config.scenario, point);
    ctx.point = std::move(point);
    const AsymptoticTarget target = asymptotic_target(ctx.p_true, *ctx.q0);
    if (std::abs(target.ell_bayes - target.ell0) <= 1e-6) {
      throw DegenerateTargetError(
          "gate limit query has |ell_bayes - ell0| <= 1e-6");
    }
    ctx.y_star = target.y_star;
    ctx.target_gap = ctx.p_true.at(target.y_star) - ctx.q0->at(target.y_star);
    contexts.push_back(std::move(ctx));
  }
  return run_sweep(ExperimentKind::GateLimit, config, std::move(contexts),
                   options);
}

ExperimentReport run_trust_limit(const SweepConfig& config,
                                 const RunOptions& options) {
  validate_common(config);
  std::vector<QueryContext> contexts;
  for (auto& point : resolve_query_points(config)) {
    QueryContext ctx(conditional_at(config.scenario, point));
    ctx.point = std::move(point);
    ctx.y_star = modal_label(ctx.p_true);
    contexts.push_back(std::move(ctx));
  }
  return run_sweep(ExperimentKind::TrustLimit, config, std::move(contexts),
                   options);
}

ExperimentReport run_retriever_limit(const SweepConfig& config,
                                     const RunOptions& options) {
  validate_common(config);
  std::vector<QueryContext> contexts;
  for (auto& point : resolve_query_points(config)) {
    QueryContext ctx(conditional_at(config.scenario, point));
    ctx.limit = retriever_limit(config.scenario, point);
    ctx.point = std::move(point);
    ctx.y_star = modal_label(ctx.p_true);
    contexts.push_back(std::move(ctx));
  }
  return run_sweep(ExperimentKind::RetrieverLimit, config, std::move(contexts),
                   options);
}

ExperimentReport run_experiment(ExperimentKind kind, const SweepConfig& config,
                                const RunOptions& options) {
  switch (kind) {
    case ExperimentKind::ModeStability:
      return run_mode_stability(config, options);
    case ExperimentKind::GateLimit: return run_gate_limit(config, options);
    case ExperimentKind::TrustLimit: return run_trust_limit(config, options);
    case ExperimentKind::RetrieverLimit:
      return run_retriever_limit(config, options);
  }
  throw std::invalid_argument("unknown experiment kind");
}

ExperimentReport aggregate(const std::vector<ExperimentReport>& reports) {
  if (reports.empty()) {
    throw std::invalid_argument("cannot aggregate zero reports");
  }
  ExperimentReport merged = reports.front();
  for (std::size_t r = 1; r < reports.size(); ++r) {
    const ExperimentReport& other = reports[r];
    if (other.kind != merged.kind ||
        other.scenario_hash != merged.scenario_hash ||
        other.num_labels != merged.num_labels ||
        other.zeta != merged.zeta || other.delta != merged.delta ||
        other.bandwidth != merged.bandwidth ||
        other.queries.size() != merged.queries.size() ||
        other.cells.size() != merged.cells.size()) {
      throw std::invalid_argument("report schema mismatch in aggregate");
    }
    for (std::size_t qi = 0; qi < merged.queries.size(); ++qi) {
      if (other.queries[qi].point != merged.queries[qi].point) {
        throw std::invalid_argument("query point mismatch in aggregate");
      }
    }
    for (std::size_t ci = 0; ci < merged.cells.size(); ++ci) {
      CellStats& into = merged.cells[ci];
      const CellStats& from = other.cells[ci];
      if (from.n != into.n || from.k != into.k ||
          from.query_index != into.query_index) {
        throw std::invalid_argument("cell key mismatch in aggregate");
      }
      into.reps += from.reps;
      into.max_dev.merge(from.max_dev);
      into.mode_mismatch.merge(from.mode_mismatch);
      into.dev_exceed.merge(from.dev_exceed);
      into.radius_exceed.merge(from.radius_exceed);
      into.wfact.merge(from.wfact);
      into.delta_h.merge(from.delta_h);
      into.delta_x.merge(from.delta_x);
      into.regime_a.merge(from.regime_a);
      into.regime_b.merge(from.regime_b);
      into.regime_c.merge(from.regime_c);
      into.sign_agree.merge(from.sign_agree);
      into.l1_gap.merge(from.l1_gap);
    }
    merged.reps += other.reps;
  }
  if (merged.kind == ExperimentKind::ModeStability) {
    for (CellStats& stats : merged.cells) {
      stats.hoeffding = hoeffding_bound(merged.delta, stats.k,
                                        merged.num_labels,
                                        stats.radius_exceed.mean());
    }
  }
  return merged;
}

}  // namespace knngate
