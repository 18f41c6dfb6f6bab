#include "knngate/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace knngate {

namespace {

double l2_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Scenario::Scenario(std::size_t dim, std::size_t num_labels, InputLaw input_law,
                   SoftmaxConditional conditional, Q0Spec q0_spec,
                   Deformation deformation, double corruption_rate,
                   SpuriousLaw spurious)
    : dim_(dim),
      num_labels_(num_labels),
      input_law_(std::move(input_law)),
      conditional_(std::move(conditional)),
      q0_spec_(std::move(q0_spec)),
      deformation_(std::move(deformation)),
      corruption_rate_(corruption_rate),
      spurious_(std::move(spurious)) {
  if (dim_ == 0) throw std::invalid_argument("scenario needs d >= 1");
  if (num_labels_ == 0) throw std::invalid_argument("scenario needs C >= 1");
  if (conditional_.weights.size() != num_labels_ ||
      conditional_.offsets.size() != num_labels_) {
    throw std::invalid_argument("conditional must have C weight rows/offsets");
  }
  for (const auto& row : conditional_.weights) {
    if (row.size() != dim_) {
      throw std::invalid_argument("conditional weight row dimension mismatch");
    }
  }
  if (!(corruption_rate_ >= 0.0 && corruption_rate_ <= 1.0)) {
    throw std::invalid_argument("corruption rate must lie in [0, 1]");
  }

  if (const auto* ball = std::get_if<BallLaw>(&input_law_)) {
    if (!(ball->radius >= 0.0)) {
      throw std::invalid_argument("ball radius must be >= 0");
    }
  } else if (const auto* box = std::get_if<BoxLaw>(&input_law_)) {
    if (box->lo.size() != dim_ || box->hi.size() != dim_) {
      throw std::invalid_argument("box bounds dimension mismatch");
    }
    for (std::size_t i = 0; i < dim_; ++i) {
      if (!(box->lo[i] <= box->hi[i])) {
        throw std::invalid_argument("box bounds must satisfy lo <= hi");
      }
    }
  } else if (const auto* gauss = std::get_if<GaussianLaw>(&input_law_)) {
    if (gauss->mean.size() != dim_) {
      throw std::invalid_argument("gaussian mean dimension mismatch");
    }
    if (!(gauss->scale > 0.0)) {
      throw std::invalid_argument("gaussian scale must be positive");
    }
  }

  if (const auto* shift = std::get_if<ConstantShift>(&deformation_)) {
    if (shift->shift.size() != dim_) {
      throw std::invalid_argument("shift dimension mismatch");
    }
  } else if (const auto* push = std::get_if<RadialPush>(&deformation_)) {
    if (!(push->t >= 0.0)) {
      throw std::invalid_argument("radial push must be >= 0");
    }
  }

  if (const auto* pm = std::get_if<SpuriousPointMass>(&spurious_)) {
    if (pm->label < 1 || pm->label > num_labels_) {
      throw std::invalid_argument("spurious point-mass label out of range");
    }
  }

  if (const auto* tempered = std::get_if<Q0Tempered>(&q0_spec_)) {
    if (!(tempered->tau > 0.0)) {
      throw std::invalid_argument("tempering tau must be positive");
    }
  } else if (const auto* shifted = std::get_if<Q0Shifted>(&q0_spec_)) {
    if (shifted->delta.size() != dim_) {
      throw std::invalid_argument("q0 shift dimension mismatch");
    }
  } else if (const auto* contam = std::get_if<Q0Contaminated>(&q0_spec_)) {
    if (!(contam->alpha >= 0.0 && contam->alpha <= 1.0)) {
      throw std::invalid_argument("contamination alpha must lie in [0, 1]");
    }
  } else if (const auto* permuted = std::get_if<Q0Permuted>(&q0_spec_)) {
    if (permuted->sigma.size() != num_labels_) {
      throw std::invalid_argument("q0 permutation must have C entries");
    }
    std::vector<bool> seen(num_labels_, false);
    for (Label v : permuted->sigma) {
      if (v < 1 || v > num_labels_ || seen[v - 1]) {
        throw std::invalid_argument("q0 permutation is not a permutation");
      }
      seen[v - 1] = true;
    }
  }

  double max_gap = 0.0;
  for (std::size_t a = 0; a < num_labels_; ++a) {
    for (std::size_t b = a + 1; b < num_labels_; ++b) {
      double acc = 0.0;
      for (std::size_t i = 0; i < dim_; ++i) {
        const double diff = conditional_.weights[a][i] -
                            conditional_.weights[b][i];
        acc += diff * diff;
      }
      max_gap = std::max(max_gap, std::sqrt(acc));
    }
  }
  lipschitz_ = 0.5 * max_gap;
}

bool Scenario::aligned() const {
  return std::holds_alternative<std::monostate>(deformation_) &&
         corruption_rate_ == 0.0;
}

ProbVec conditional_at(const Scenario& scenario, std::span<const double> x) {
  if (x.size() != scenario.dim()) {
    throw std::invalid_argument("query dimension mismatch");
  }
  const auto& cond = scenario.conditional();
  std::vector<double> scores(scenario.num_labels());
  for (std::size_t y = 0; y < scenario.num_labels(); ++y) {
    double s = cond.offsets[y];
    for (std::size_t i = 0; i < scenario.dim(); ++i) {
      s += cond.weights[y][i] * x[i];
    }
    scores[y] = s;
  }
  const double top = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double& s : scores) {
    s = std::exp(s - top);
    sum += s;
  }
  for (double& s : scores) s /= sum;
  return ProbVec(std::move(scores));
}

ProbVec corrupt(const ProbVec& p_true, double rho, const ProbVec& s) {
  return blend(p_true, s, rho);
}

ProbVec spurious_at(const Scenario& scenario, std::span<const double>) {
  if (const auto* pm = std::get_if<SpuriousPointMass>(&scenario.spurious())) {
    return ProbVec::point_mass(pm->label, scenario.num_labels());
  }
  return ProbVec::uniform(scenario.num_labels());
}

ProbVec memory_label_law(const Scenario& scenario, std::span<const double> u) {
  return corrupt(conditional_at(scenario, u), scenario.corruption_rate(),
                 spurious_at(scenario, u));
}

ProbVec q0_at(const Scenario& scenario, std::span<const double> x) {
  const ProbVec base = conditional_at(scenario, x);
  if (std::holds_alternative<Q0Bayes>(scenario.q0_spec())) {
    return base;
  }
  if (const auto* tempered = std::get_if<Q0Tempered>(&scenario.q0_spec())) {
    std::vector<double> out(base.num_labels());
    double sum = 0.0;
    for (std::size_t i = 0; i < base.num_labels(); ++i) {
      out[i] = std::pow(base[i], tempered->tau);
      sum += out[i];
    }
    for (double& v : out) v /= sum;
    return ProbVec(std::move(out));
  }
  if (const auto* shifted = std::get_if<Q0Shifted>(&scenario.q0_spec())) {
    std::vector<double> moved(x.begin(), x.end());
    for (std::size_t i = 0; i < moved.size(); ++i) {
      moved[i] += shifted->delta[i];
    }
    return conditional_at(scenario, moved);
  }
  if (const auto* contam = std::get_if<Q0Contaminated>(&scenario.q0_spec())) {
    return blend(base, ProbVec::uniform(base.num_labels()), contam->alpha);
  }
  const auto& permuted = std::get<Q0Permuted>(scenario.q0_spec());
  std::vector<double> out(base.num_labels());
  for (std::size_t y = 0; y < base.num_labels(); ++y) {
    out[y] = base.at(permuted.sigma[y]);
  }
  return ProbVec(std::move(out));
}

std::vector<double> deform(const Scenario& scenario,
                           std::span<const double> u) {
  std::vector<double> x(u.begin(), u.end());
  if (const auto* shift = std::get_if<ConstantShift>(&scenario.deformation())) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += shift->shift[i];
  } else if (const auto* push =
                 std::get_if<RadialPush>(&scenario.deformation())) {
    const double len = l2_norm(u);
    if (len > 0.0) {
      const double factor = 1.0 + push->t / len;
      for (double& v : x) v *= factor;
    }
  }
  return x;
}

std::vector<double> sample_input(const Scenario& scenario, Rng& rng) {
  const std::size_t d = scenario.dim();
  std::vector<double> u(d);
  if (const auto* ball = std::get_if<BallLaw>(&scenario.input_law())) {
    // Gaussian direction, radius R u^(1/d).
    double len = 0.0;
    while (len == 0.0) {
      for (double& v : u) v = rng.normal();
      len = l2_norm(u);
    }
    const double radius =
        ball->radius * std::pow(rng.uniform01(), 1.0 / double(d));
    for (double& v : u) v *= radius / len;
  } else if (const auto* box = std::get_if<BoxLaw>(&scenario.input_law())) {
    for (std::size_t i = 0; i < d; ++i) {
      u[i] = rng.uniform(box->lo[i], box->hi[i]);
    }
  } else {
    const auto& gauss = std::get<GaussianLaw>(scenario.input_law());
    for (std::size_t i = 0; i < d; ++i) {
      u[i] = gauss.mean[i] + gauss.scale * rng.normal();
    }
  }
  return u;
}

MemoryStore sample_memory(const Scenario& scenario, std::size_t n,
                          std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("memory size must be >= 1");
  Rng rng(seed);
  std::vector<double> points;
  points.reserve(n * scenario.dim());
  std::vector<Label> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> u = sample_input(scenario, rng);
    labels.push_back(rng.categorical(memory_label_law(scenario, u)));
    points.insert(points.end(), u.begin(), u.end());
  }
  return MemoryStore(std::move(points), scenario.dim(), std::move(labels),
                     scenario.num_labels(), Norm::L2);
}

QueryDraw make_query(const Scenario& scenario, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<double> u = sample_input(scenario, rng);
  std::vector<double> x = deform(scenario, u);
  ProbVec p_true = conditional_at(scenario, x);
  return QueryDraw{std::move(x), std::move(p_true)};
}

SupportInfo support_distance(const Scenario& scenario,
                             std::span<const double> x) {
  if (x.size() != scenario.dim()) {
    throw std::invalid_argument("query dimension mismatch");
  }
  // Supports are convex (ball, box) or all of R^d (gaussian), so the nearest
  // point is always unique.
  if (const auto* ball = std::get_if<BallLaw>(&scenario.input_law())) {
    const double len = l2_norm(x);
    if (len <= ball->radius) {
      return SupportInfo{0.0, {x.begin(), x.end()}, true};
    }
    std::vector<double> nearest(x.begin(), x.end());
    const double scale = ball->radius / len;
    for (double& v : nearest) v *= scale;
    return SupportInfo{len - ball->radius, std::move(nearest), true};
  }
  if (const auto* box = std::get_if<BoxLaw>(&scenario.input_law())) {
    std::vector<double> nearest(x.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      nearest[i] = std::clamp(x[i], box->lo[i], box->hi[i]);
      const double diff = x[i] - nearest[i];
      acc += diff * diff;
    }
    return SupportInfo{std::sqrt(acc), std::move(nearest), true};
  }
  return SupportInfo{0.0, {x.begin(), x.end()}, true};
}

BiasBounds bias_bounds(const Scenario& scenario, std::span<const double> x) {
  const SupportInfo info = support_distance(scenario, x);
  if (!info.unique) {
    throw std::invalid_argument("nearest support point is not unique");
  }
  const ProbVec at_query = conditional_at(scenario, x);
  const ProbVec at_nearest = conditional_at(scenario, info.nearest);
  const double delta_geom = l1_distance(at_nearest, at_query);
  const double delta_sem =
      l1_distance(spurious_at(scenario, info.nearest), at_query);
  const double rho = scenario.corruption_rate();
  if (delta_geom > scenario.lipschitz() * info.distance + 1e-9) {
    throw std::runtime_error("Lipschitz certificate violated by delta_geom");
  }
  return BiasBounds{delta_geom, delta_sem,
                    (1.0 - rho) * delta_geom + rho * delta_sem};
}

ProbVec retriever_limit(const Scenario& scenario, std::span<const double> x) {
  const SupportInfo info = support_distance(scenario, x);
  if (!info.unique) {
    throw std::invalid_argument("nearest support point is not unique");
  }
  return memory_label_law(scenario, info.nearest);
}

double trust_limit(const Scenario& scenario, std::span<const double> x) {
  const double d = support_distance(scenario, x).distance;
  return std::exp(-d * d);
}

std::pair<std::vector<double>, std::vector<double>> envelope_bounds(
    std::span<const ProbVec> candidates) {
  if (candidates.empty()) {
    throw std::invalid_argument("envelope needs at least one candidate");
  }
  const std::size_t labels = candidates.front().num_labels();
  std::vector<double> lo(labels, 1.0);
  std::vector<double> hi(labels, 0.0);
  for (const ProbVec& p : candidates) {
    if (p.num_labels() != labels) {
      throw std::invalid_argument("candidate label count mismatch");
    }
    for (std::size_t i = 0; i < labels; ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  }
  return {std::move(lo), std::move(hi)};
}

std::string scenario_description(const Scenario& scenario) {
  std::string out;
  out += "d=" + std::to_string(scenario.dim());
  out += ";C=" + std::to_string(scenario.num_labels());
  if (const auto* ball = std::get_if<BallLaw>(&scenario.input_law())) {
    out += ";law=ball(" + fmt_double(ball->radius) + ")";
  } else if (const auto* box = std::get_if<BoxLaw>(&scenario.input_law())) {
    out += ";law=box(";
    for (std::size_t i = 0; i < box->lo.size(); ++i) {
      if (i) out += ",";
      out += fmt_double(box->lo[i]) + ":" + fmt_double(box->hi[i]);
    }
    out += ")";
  } else {
    const auto& gauss = std::get<GaussianLaw>(scenario.input_law());
    out += ";law=gaussian(";
    for (std::size_t i = 0; i < gauss.mean.size(); ++i) {
      if (i) out += ",";
      out += fmt_double(gauss.mean[i]);
    }
    out += ";" + fmt_double(gauss.scale) + ")";
  }
  out += ";weights=[";
  for (std::size_t y = 0; y < scenario.num_labels(); ++y) {
    if (y) out += ";";
    for (std::size_t i = 0; i < scenario.dim(); ++i) {
      if (i) out += ",";
      out += fmt_double(scenario.conditional().weights[y][i]);
    }
  }
  out += "];offsets=[";
  for (std::size_t y = 0; y < scenario.num_labels(); ++y) {
    if (y) out += ",";
    out += fmt_double(scenario.conditional().offsets[y]);
  }
  out += "]";
  if (std::holds_alternative<Q0Bayes>(scenario.q0_spec())) {
    out += ";q0=bayes";
  } else if (const auto* t = std::get_if<Q0Tempered>(&scenario.q0_spec())) {
    out += ";q0=tempered(" + fmt_double(t->tau) + ")";
  } else if (const auto* s = std::get_if<Q0Shifted>(&scenario.q0_spec())) {
    out += ";q0=shifted(";
    for (std::size_t i = 0; i < s->delta.size(); ++i) {
      if (i) out += ",";
      out += fmt_double(s->delta[i]);
    }
    out += ")";
  } else if (const auto* c = std::get_if<Q0Contaminated>(&scenario.q0_spec())) {
    out += ";q0=contaminated(" + fmt_double(c->alpha) + ")";
  } else {
    const auto& p = std::get<Q0Permuted>(scenario.q0_spec());
    out += ";q0=permuted(";
    for (std::size_t i = 0; i < p.sigma.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(p.sigma[i]);
    }
    out += ")";
  }
  if (std::holds_alternative<std::monostate>(scenario.deformation())) {
    out += ";deform=none";
  } else if (const auto* s =
                 std::get_if<ConstantShift>(&scenario.deformation())) {
    out += ";deform=shift(";
    for (std::size_t i = 0; i < s->shift.size(); ++i) {
      if (i) out += ",";
      out += fmt_double(s->shift[i]);
    }
    out += ")";
  } else {
    const auto& p = std::get<RadialPush>(scenario.deformation());
    out += ";deform=push(" + fmt_double(p.t) + ")";
  }
  out += ";rho=" + fmt_double(scenario.corruption_rate());
  if (const auto* pm = std::get_if<SpuriousPointMass>(&scenario.spurious())) {
    out += ";spurious=point_mass(" + std::to_string(pm->label) + ")";
  } else {
    out += ";spurious=uniform";
  }
  return out;
}

std::string scenario_hash(const Scenario& scenario) {
  const std::string text = scenario_description(scenario);
  std::uint64_t hash = 14695981039346656037ull;  // FNV-1a offset basis
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace knngate
