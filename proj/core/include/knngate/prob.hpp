#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace knngate {

/// Label indices are 1-based: a distribution over C classes has labels 1..C.
using Label = std::uint32_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Absolute tolerance accepted on the sum of probabilities at construction.
/// Entries are renormalized by their exact sum afterwards, so the tolerance
/// only absorbs rounding in analytically normalized inputs.
inline constexpr double kProbSumTolerance = 1e-12;

/// A categorical distribution over a finite label set.
///
/// Invariants enforced at construction: every entry in [0,1], entries sum to
/// one within kProbSumTolerance (then renormalized by the exact sum).
/// Immutable after construction.
class ProbVec {
 public:
  explicit ProbVec(std::vector<double> probs);

  static ProbVec uniform(std::size_t num_labels);
  static ProbVec point_mass(Label label, std::size_t num_labels);

  std::size_t num_labels() const { return probs_.size(); }

  /// Probability of label y in 1..num_labels().
  double at(Label y) const { return probs_[y - 1]; }

  /// Zero-based access for iteration.
  double operator[](std::size_t i) const { return probs_[i]; }

  const std::vector<double>& values() const { return probs_; }

  bool operator==(const ProbVec& other) const = default;

 private:
  std::vector<double> probs_;
};

/// Cross-entropy sum_y p_y (-log q_y) in nats, with the 0 log 0 = 0
/// convention: labels with p_y = 0 contribute nothing. Returns +infinity
/// exactly when some label has p_y > 0 and q_y = 0.
double cross_entropy(const ProbVec& p, const ProbVec& q);

/// Shannon entropy of p in nats; equals cross_entropy(p, p).
double shannon_entropy(const ProbVec& p);

/// Smallest label attaining the maximal probability (deterministic
/// tie-breaking by lowest index).
Label modal_label(const ProbVec& p);

/// L1 distance sum_y |p_y - q_y|, in [0, 2]. (Total variation is half this;
/// the L1 convention is used throughout.)
double l1_distance(const ProbVec& p, const ProbVec& q);

/// Entrywise convex combination (1 - rho) * p + rho * s.
ProbVec blend(const ProbVec& p, const ProbVec& s, double rho);

/// Additive smoothing (p_y + eps) / (1 + C eps), eps >= 0. With eps = 0 this
/// is the identity; nonzero eps removes zero entries.
ProbVec additive_smoothing(const ProbVec& p, double eps);

}  // namespace knngate
