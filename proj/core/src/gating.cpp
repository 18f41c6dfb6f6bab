#include "knngate/gating.hpp"

#include <cmath>
#include <stdexcept>

namespace knngate {

GateInputs::GateInputs(ProbVec p_true_in, ProbVec q0_in, ProbVec rhat_in,
                       double w_fact_in, double zeta_in)
    : p_true(std::move(p_true_in)),
      q0(std::move(q0_in)),
      rhat(std::move(rhat_in)),
      w_fact(w_fact_in),
      zeta(zeta_in) {
  if (p_true.num_labels() != q0.num_labels() ||
      p_true.num_labels() != rhat.num_labels()) {
    throw std::invalid_argument("gate distributions must share a label set");
  }
  if (!(w_fact > 0.0 && w_fact <= 1.0)) {
    throw std::invalid_argument("w_fact must lie in (0, 1]");
  }
  if (!(zeta >= 0.0)) throw std::invalid_argument("zeta must be >= 0");
}

ProbVec mixture(const ProbVec& q0, const ProbVec& rhat, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("lambda must lie in [0, 1]");
  }
  return blend(q0, rhat, lambda);
}

double local_objective(const GateInputs& inputs, double lambda) {
  const double fit = cross_entropy(inputs.p_true,
                                   mixture(inputs.q0, inputs.rhat, lambda));
  return fit + inputs.zeta * lambda * (1.0 - inputs.w_fact);
}

double objective_derivative(const GateInputs& inputs, double lambda) {
  double acc = 0.0;
  for (std::size_t i = 0; i < inputs.p_true.num_labels(); ++i) {
    const double py = inputs.p_true[i];
    if (py == 0.0) continue;
    const double qy = inputs.q0[i];
    const double ry = inputs.rhat[i];
    if (qy == 0.0 && ry == 0.0) {
      throw std::invalid_argument(
          "objective is infinite for every lambda (supported label with zero "
          "mass in both q0 and rhat)");
    }
    const double mixed = (1.0 - lambda) * qy + lambda * ry;
    // mixed == 0 only at a boundary; IEEE division then yields the correct
    // one-sided infinite limit.
    acc += -py * (ry - qy) / mixed;
  }
  return acc + inputs.zeta * (1.0 - inputs.w_fact);
}

GateDecision hard_gate(const GateInputs& inputs) {
  const double ell0 = cross_entropy(inputs.p_true, inputs.q0);
  const double ellr = cross_entropy(inputs.p_true, inputs.rhat);
  const double penalty = inputs.zeta * (1.0 - inputs.w_fact);
  const double lambda = (ell0 <= ellr + penalty) ? 0.0 : 1.0;
  return GateDecision{lambda, ell0, ellr, penalty,
                      lambda == 0.0 ? inputs.q0 : inputs.rhat, GateMode::Hard};
}

GateDecision soft_gate(const GateInputs& inputs, double tol,
                       int max_iterations) {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  const double ell0 = cross_entropy(inputs.p_true, inputs.q0);
  const double ellr = cross_entropy(inputs.p_true, inputs.rhat);
  const double penalty = inputs.zeta * (1.0 - inputs.w_fact);
  if (std::isinf(ell0) && std::isinf(ellr)) {
    throw std::invalid_argument("objective is infinite for every lambda");
  }

  const auto decision = [&](double lambda) {
    return GateDecision{lambda,   ell0,
                        ellr,     penalty,
                        mixture(inputs.q0, inputs.rhat, lambda),
                        GateMode::Soft};
  };

  // J is convex, so the derivative is nondecreasing; screen the boundaries,
  // then bisect for the interior root. When ellr = +inf the derivative at 1
  // is the one-sided limit +inf, which keeps the solution in [0, 1).
  if (objective_derivative(inputs, 0.0) >= 0.0) return decision(0.0);
  if (objective_derivative(inputs, 1.0) <= 0.0) return decision(1.0);

  double lo = 0.0;
  double hi = 1.0;
  for (int iter = 0; iter < max_iterations; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double deriv = objective_derivative(inputs, mid);
    if (std::abs(deriv) <= tol) return decision(mid);
    if (deriv > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  throw std::runtime_error("soft gate bisection did not converge");
}

}  // namespace knngate
