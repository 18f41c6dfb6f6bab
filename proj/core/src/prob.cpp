#include "knngate/prob.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace knngate {

namespace {

void check_same_size(const ProbVec& p, const ProbVec& q) {
  if (p.num_labels() != q.num_labels()) {
    throw std::invalid_argument("label count mismatch: " +
                                std::to_string(p.num_labels()) + " vs " +
                                std::to_string(q.num_labels()));
  }
}

}  // namespace

ProbVec::ProbVec(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) {
    throw std::invalid_argument("ProbVec needs at least one label");
  }
  double sum = 0.0;
  for (double v : probs_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("probability entry outside [0,1]: " +
                                  std::to_string(v));
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kProbSumTolerance) {
    throw std::invalid_argument("probabilities sum to " + std::to_string(sum) +
                                ", expected 1");
  }
  if (sum != 1.0) {
    for (double& v : probs_) v /= sum;
  }
}

ProbVec ProbVec::uniform(std::size_t num_labels) {
  if (num_labels == 0) {
    throw std::invalid_argument("ProbVec needs at least one label");
  }
  return ProbVec(std::vector<double>(num_labels, 1.0 / double(num_labels)));
}

ProbVec ProbVec::point_mass(Label label, std::size_t num_labels) {
  if (label < 1 || label > num_labels) {
    throw std::invalid_argument("point mass label out of range");
  }
  std::vector<double> v(num_labels, 0.0);
  v[label - 1] = 1.0;
  return ProbVec(std::move(v));
}

double cross_entropy(const ProbVec& p, const ProbVec& q) {
  check_same_size(p, q);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.num_labels(); ++i) {
    const double py = p[i];
    if (py == 0.0) continue;  // 0 log 0 = 0
    const double qy = q[i];
    if (qy == 0.0) return kInfinity;
    acc += py * (-std::log(qy));
  }
  return acc;
}

double shannon_entropy(const ProbVec& p) { return cross_entropy(p, p); }

Label modal_label(const ProbVec& p) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.num_labels(); ++i) {
    if (p[i] > p[best]) best = i;
  }
  return static_cast<Label>(best + 1);
}

double l1_distance(const ProbVec& p, const ProbVec& q) {
  check_same_size(p, q);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.num_labels(); ++i) {
    acc += std::abs(p[i] - q[i]);
  }
  return acc;
}

ProbVec blend(const ProbVec& p, const ProbVec& s, double rho) {
  check_same_size(p, s);
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::invalid_argument("mixing weight outside [0,1]");
  }
  // Endpoints reproduce the inputs bitwise.
  if (rho == 0.0) return p;
  if (rho == 1.0) return s;
  std::vector<double> out(p.num_labels());
  for (std::size_t i = 0; i < p.num_labels(); ++i) {
    out[i] = (1.0 - rho) * p[i] + rho * s[i];
  }
  return ProbVec(std::move(out));
}

ProbVec additive_smoothing(const ProbVec& p, double eps) {
  if (!(eps >= 0.0)) {
    throw std::invalid_argument("smoothing must be nonnegative");
  }
  if (eps == 0.0) return p;
  const double denom = 1.0 + double(p.num_labels()) * eps;
  std::vector<double> out(p.num_labels());
  for (std::size_t i = 0; i < p.num_labels(); ++i) {
    out[i] = (p[i] + eps) / denom;
  }
  return ProbVec(std::move(out));
}

}  // namespace knngate
