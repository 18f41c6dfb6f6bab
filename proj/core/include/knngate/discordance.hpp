#pragma once

#include <stdexcept>
#include <string>

#include "knngate/gating.hpp"
#include "knngate/prob.hpp"

namespace knngate {

/// Switching regimes of the optimal hard gate.
///   A: switch improves fit and reinforces the retriever's top label.
///   B: switch improves fit but lowers mass on the top label (trade-off).
///   C: the penalty blocks the switch; the base predictor stays active.
enum class Regime { A, B, C };

std::string regime_name(Regime regime);

/// Per-query discordance bookkeeping under the optimal hard gate.
struct DiscordanceRecord {
  Label y_r;       // retriever's modal label
  double lambda;   // hard-gate decision
  double h_q0;     // discordance of the frozen base predictor
  double h_mixed;  // discordance of the gated mixture
  double delta_h;  // h_q0 - h_mixed, linear in lambda
  double delta_x;  // rhat(y_r) - q0(y_r)
  Regime regime;
};

/// Large-sample targets at a query: the Bayes label and margin, the Bayes and
/// base cross-entropies, the limiting gate value, and the limit of delta_h.
struct AsymptoticTarget {
  Label y_star;
  double gamma;      // top-two probability gap of p_true
  double ell_bayes;  // shannon entropy of p_true
  double ell0;       // cross-entropy of q0 under p_true
  double lambda_inf; // 1 if ell_bayes < ell0, else 0
  double limit_value;
};

/// Local discordance score w_fact * (1 - dist(y_r)); lies in [0, w_fact].
double hdisc(double w_fact, const ProbVec& dist, Label y_r);

/// Change of the discordance score under the gate:
/// lambda * w_fact * (rhat(y_r) - q0(y_r)). Bounded by lambda * w_fact in
/// absolute value.
double delta_h(double lambda, double w_fact, double rhat_at_yr,
               double q0_at_yr);

/// Classify which regime a hard-gate comparison falls in. Extended-real
/// inputs follow the natural ordering: an infinite ellr lands in C unless
/// ell0 is also infinite (then C via the >= convention).
Regime classify_regime(double ell0, double ellr, double penalty,
                       double rhat_at_yr, double q0_at_yr);

/// Realized change under the optimal hard gate: runs hard_gate, takes y_r as
/// the retriever's modal label, and fills the full record.
DiscordanceRecord realized_delta_h(const GateInputs& inputs);

/// Thrown by asymptotic_target when its hypotheses fail.
struct DegenerateTargetError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Deterministic limit data for a query. Throws DegenerateTargetError when
/// the Bayes label is not unique (gamma = 0) or when ell_bayes and ell0
/// coincide within 1e-12 (the excluded degenerate case).
AsymptoticTarget asymptotic_target(const ProbVec& p_true, const ProbVec& q0);

}  // namespace knngate
