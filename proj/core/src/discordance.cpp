#include "knngate/discordance.hpp"

#include <cmath>
#include <stdexcept>

namespace knngate {

std::string regime_name(Regime regime) {
  switch (regime) {
    case Regime::A: return "A";
    case Regime::B: return "B";
    case Regime::C: return "C";
  }
  throw std::invalid_argument("unknown regime");
}

double hdisc(double w_fact, const ProbVec& dist, Label y_r) {
  if (!(w_fact > 0.0 && w_fact <= 1.0)) {
    throw std::invalid_argument("w_fact must lie in (0, 1]");
  }
  if (y_r < 1 || y_r > dist.num_labels()) {
    throw std::invalid_argument("label out of range");
  }
  return w_fact * (1.0 - dist.at(y_r));
}

double delta_h(double lambda, double w_fact, double rhat_at_yr,
               double q0_at_yr) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("lambda must lie in [0, 1]");
  }
  return lambda * w_fact * (rhat_at_yr - q0_at_yr);
}

Regime classify_regime(double ell0, double ellr, double penalty,
                       double rhat_at_yr, double q0_at_yr) {
  if (!(ellr + penalty < ell0)) return Regime::C;
  return rhat_at_yr >= q0_at_yr ? Regime::A : Regime::B;
}

DiscordanceRecord realized_delta_h(const GateInputs& inputs) {
  const GateDecision gate = hard_gate(inputs);
  const Label y_r = modal_label(inputs.rhat);
  const double rhat_at = inputs.rhat.at(y_r);
  const double q0_at = inputs.q0.at(y_r);
  DiscordanceRecord record;
  record.y_r = y_r;
  record.lambda = gate.lambda;
  record.h_q0 = hdisc(inputs.w_fact, inputs.q0, y_r);
  record.h_mixed = hdisc(inputs.w_fact, gate.mixed, y_r);
  record.delta_x = rhat_at - q0_at;
  record.delta_h = delta_h(gate.lambda, inputs.w_fact, rhat_at, q0_at);
  record.regime =
      classify_regime(gate.ell0, gate.ellr, gate.penalty, rhat_at, q0_at);
  return record;
}

AsymptoticTarget asymptotic_target(const ProbVec& p_true, const ProbVec& q0) {
  if (p_true.num_labels() != q0.num_labels()) {
    throw std::invalid_argument("label count mismatch");
  }
  const Label y_star = modal_label(p_true);
  const double top = p_true.at(y_star);
  double runner_up = 0.0;
  for (std::size_t i = 0; i < p_true.num_labels(); ++i) {
    if (i + 1 == y_star) continue;
    runner_up = std::max(runner_up, p_true[i]);
  }
  const double gamma = top - runner_up;
  if (!(gamma > 0.0)) {
    throw DegenerateTargetError("Bayes label is not unique (gamma = 0)");
  }
  const double ell_bayes = shannon_entropy(p_true);
  const double ell0 = cross_entropy(p_true, q0);
  if (std::abs(ell_bayes - ell0) <= 1e-12) {
    throw DegenerateTargetError(
        "ell_bayes and ell0 coincide within 1e-12 (degenerate query)");
  }
  const double lambda_inf = ell_bayes < ell0 ? 1.0 : 0.0;
  return AsymptoticTarget{
      y_star,     gamma, ell_bayes, ell0, lambda_inf,
      lambda_inf * (p_true.at(y_star) - q0.at(y_star)),
  };
}

}  // namespace knngate
