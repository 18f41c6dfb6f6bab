#pragma once

#include "knngate/prob.hpp"

namespace knngate {

/// Everything the per-query gate needs: the true conditional, the frozen base
/// predictor, the retriever distribution, the trust weight, and the penalty
/// strength zeta.
struct GateInputs {
  ProbVec p_true;
  ProbVec q0;
  ProbVec rhat;
  double w_fact;
  double zeta;

  GateInputs(ProbVec p_true_in, ProbVec q0_in, ProbVec rhat_in,
             double w_fact_in, double zeta_in);
};

enum class GateMode { Hard, Soft };

/// Outcome of a gate decision at one query.
/// penalty is zeta * (1 - w_fact); mixed is the gated predictive
/// distribution (1 - lambda) q0 + lambda rhat.
struct GateDecision {
  double lambda;
  double ell0;     // cross-entropy of the base predictor, may be +inf
  double ellr;     // cross-entropy of the retriever, may be +inf
  double penalty;  // zeta * (1 - w_fact)
  ProbVec mixed;
  GateMode mode;
};

/// Convex combination (1 - lambda) q0 + lambda rhat, lambda in [0, 1].
ProbVec mixture(const ProbVec& q0, const ProbVec& rhat, double lambda);

/// Per-query objective J(lambda) = cross_entropy(p_true, mixture) +
/// zeta * lambda * (1 - w_fact). May be +infinity.
double local_objective(const GateInputs& inputs, double lambda);

/// Derivative dJ/dlambda = -sum_y p_y (rhat_y - q0_y) / p_lambda(y)
/// + zeta (1 - w_fact), taken over labels with p_y > 0. At a boundary where
/// the mixture has a zero entry on the support this is the one-sided limit
/// (+-infinity).
double objective_derivative(const GateInputs& inputs, double lambda);

/// Bayes-optimal binary gate: lambda = 0 if ell0 <= ellr + penalty
/// (equality kept at 0), else lambda = 1. Infinite ellr with finite ell0
/// forces lambda = 0.
GateDecision hard_gate(const GateInputs& inputs);

/// Minimizes J over [0, 1]. Boundary derivative screening first, then
/// bisection on the monotone derivative; interior solutions satisfy
/// |dJ/dlambda| <= tol. Throws on nonconvergence after max_iterations and
/// when J is identically +infinity.
GateDecision soft_gate(const GateInputs& inputs, double tol = 1e-10,
                       int max_iterations = 200);

}  // namespace knngate
