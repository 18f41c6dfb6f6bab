#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "knngate/memory.hpp"
#include "knngate/prob.hpp"
#include "knngate/rng.hpp"

namespace knngate {

// ---------------------------------------------------------------------------
// Generative-world building blocks
// ---------------------------------------------------------------------------

/// Uniform law on the closed L2 ball of the given radius centered at the
/// origin.
struct BallLaw {
  double radius = 1.0;
};

/// Uniform law on the axis-aligned box [lo_i, hi_i].
struct BoxLaw {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Isotropic gaussian with the given mean and scale (full support).
struct GaussianLaw {
  std::vector<double> mean;
  double scale = 1.0;
};

using InputLaw = std::variant<BallLaw, BoxLaw, GaussianLaw>;

struct ConstantShift {
  std::vector<double> shift;
};

/// x = u (1 + t / |u|): pushes every point radially outward by t. The origin
/// is kept fixed (the map is defined only for u != 0; the origin has measure
/// zero under every supported input law).
struct RadialPush {
  double t = 0.0;
};

/// monostate = no deformation (aligned queries).
using Deformation = std::variant<std::monostate, ConstantShift, RadialPush>;

struct SpuriousUniform {};
struct SpuriousPointMass {
  Label label = 1;
};
using SpuriousLaw = std::variant<SpuriousUniform, SpuriousPointMass>;

// Base-predictor constructors. The base model is frozen; these derive it from
// the scenario's conditional so that its quality is controlled analytically.
struct Q0Bayes {};
struct Q0Tempered {
  double tau = 1.0;  // q0 proportional to P^tau
};
struct Q0Shifted {
  std::vector<double> delta;  // q0(.|x) = P(.|x + delta)
};
struct Q0Contaminated {
  double alpha = 0.0;  // (1 - alpha) P + alpha uniform
};
struct Q0Permuted {
  std::vector<Label> sigma;  // q0(y|x) = P(sigma(y)|x)
};
using Q0Spec =
    std::variant<Q0Bayes, Q0Tempered, Q0Shifted, Q0Contaminated, Q0Permuted>;

/// Softmax-affine conditional P(y|x) proportional to exp(a_y . x + b_y).
/// Strictly positive everywhere and globally Lipschitz per label with
/// constant (1/2) max_{y,y'} |a_y - a_{y'}|_2.
struct SoftmaxConditional {
  std::vector<std::vector<double>> weights;  // C rows of d entries
  std::vector<double> offsets;               // C entries
};

/// A synthetic generative world with analytically known ground truth:
/// memory inputs U ~ input_law, memory labels V | U from the rho-corrupted
/// conditional, queries X = T(U) through the deformation, and true query
/// labels from the softmax conditional at X. All geometry (distances,
/// supports, deformations) is Euclidean.
class Scenario {
 public:
  Scenario(std::size_t dim, std::size_t num_labels, InputLaw input_law,
           SoftmaxConditional conditional, Q0Spec q0_spec,
           Deformation deformation, double corruption_rate,
           SpuriousLaw spurious);

  std::size_t dim() const { return dim_; }
  std::size_t num_labels() const { return num_labels_; }
  const InputLaw& input_law() const { return input_law_; }
  const SoftmaxConditional& conditional() const { return conditional_; }
  const Q0Spec& q0_spec() const { return q0_spec_; }
  const Deformation& deformation() const { return deformation_; }
  double corruption_rate() const { return corruption_rate_; }
  const SpuriousLaw& spurious() const { return spurious_; }

  /// Valid per-label Lipschitz constant of the conditional,
  /// (1/2) max_{y,y'} |a_y - a_{y'}|_2 (also valid for the L1 distance of
  /// the full label vector).
  double lipschitz() const { return lipschitz_; }

  /// True whenever queries and memory share both laws (no deformation, no
  /// corruption).
  bool aligned() const;

 private:
  std::size_t dim_;
  std::size_t num_labels_;
  InputLaw input_law_;
  SoftmaxConditional conditional_;
  double lipschitz_;
  Q0Spec q0_spec_;
  Deformation deformation_;
  double corruption_rate_;
  SpuriousLaw spurious_;
};

// ---------------------------------------------------------------------------
// Laws and samplers
// ---------------------------------------------------------------------------

/// The true conditional P(.|x): softmax of the affine scores.
ProbVec conditional_at(const Scenario& scenario, std::span<const double> x);

/// Label corruption (1 - rho) p + rho s.
ProbVec corrupt(const ProbVec& p_true, double rho, const ProbVec& s);

/// The spurious distribution s(.|u). Constant in u for the supported laws.
ProbVec spurious_at(const Scenario& scenario, std::span<const double> u);

/// The memory label law Q(.|u) = corrupt(conditional_at(u), rho, s(.|u)).
ProbVec memory_label_law(const Scenario& scenario, std::span<const double> u);

/// The frozen base predictor q0(.|x) for the scenario's q0 spec.
ProbVec q0_at(const Scenario& scenario, std::span<const double> x);

/// Apply the deformation T to a memory input.
std::vector<double> deform(const Scenario& scenario,
                           std::span<const double> u);

/// One draw from the memory input law.
std::vector<double> sample_input(const Scenario& scenario, Rng& rng);

/// n i.i.d. memory pairs; deterministic given the seed. The store uses the
/// L2 norm (the scenario oracles are Euclidean).
MemoryStore sample_memory(const Scenario& scenario, std::size_t n,
                          std::uint64_t seed);

struct QueryDraw {
  std::vector<double> point;
  ProbVec p_true;
};

/// Draw U from the input law, deform it, and evaluate the true conditional
/// at the deformed point.
QueryDraw make_query(const Scenario& scenario, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Support geometry and limit oracles
// ---------------------------------------------------------------------------

struct SupportInfo {
  double distance;              // d(x, S), 0 when x is in the closed support
  std::vector<double> nearest;  // the nearest support point
  bool unique;                  // always true here: supports are convex (or
                                // everything, for the gaussian law)
};

/// Closed-form distance to (and projection onto) the support of the input
/// law.
SupportInfo support_distance(const Scenario& scenario,
                             std::span<const double> x);

struct BiasBounds {
  double delta_geom;  // L1 gap from the geometric displacement
  double delta_sem;   // L1 gap from the semantic corruption
  double l1_bound;    // (1 - rho) delta_geom + rho delta_sem
};

/// L1 discrepancy decomposition at x against the nearest support point u_x.
/// Also checks delta_geom <= lipschitz * d(x, S).
BiasBounds bias_bounds(const Scenario& scenario, std::span<const double> x);

/// The limiting retriever distribution at x: the memory label law at the
/// nearest support point u_x (equal to x itself in-support).
ProbVec retriever_limit(const Scenario& scenario, std::span<const double> x);

/// The limiting trust weight exp(-d(x, S)^2).
double trust_limit(const Scenario& scenario, std::span<const double> x);

/// Envelope over a set of candidate limit distributions (the multiple
/// nearest-point case): per-label [min, max] over the candidates.
std::pair<std::vector<double>, std::vector<double>> envelope_bounds(
    std::span<const ProbVec> candidates);

// ---------------------------------------------------------------------------
// Identification
// ---------------------------------------------------------------------------

/// Canonical one-line description of a scenario; input to scenario_hash and
/// recorded in run manifests.
std::string scenario_description(const Scenario& scenario);

/// FNV-1a over the canonical description, rendered as 16 hex digits.
std::string scenario_hash(const Scenario& scenario);

}  // namespace knngate
