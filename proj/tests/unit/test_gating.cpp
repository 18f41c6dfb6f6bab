#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>

#include "knngate/gating.hpp"
#include "knngate/rng.hpp"

using namespace knngate;

namespace {

ProbVec random_prob(Rng& rng, std::size_t labels, bool allow_zeros) {
  std::vector<double> w(labels);
  double sum = 0.0;
  for (double& v : w) {
    v = rng.uniform01();
    if (allow_zeros && rng.uniform01() < 0.2) v = 0.0;
    sum += v;
  }
  if (sum == 0.0) {
    w[0] = 1.0;
    sum = 1.0;
  }
  for (double& v : w) v /= sum;
  return ProbVec(w);
}

GateInputs random_inputs(Rng& rng, bool allow_zeros) {
  const std::size_t labels = 2 + rng.uniform_int(4);
  return GateInputs(random_prob(rng, labels, allow_zeros),
                    random_prob(rng, labels, allow_zeros),
                    random_prob(rng, labels, allow_zeros),
                    0.05 + 0.95 * rng.uniform01(), 2.0 * rng.uniform01());
}

}  // namespace

TEST_CASE("mixture endpoints and midpoint") {
  const ProbVec q0({1, 0});
  const ProbVec rhat({0, 1});
  CHECK(mixture(q0, rhat, 0.0) == q0);
  CHECK(mixture(q0, rhat, 1.0) == rhat);
  CHECK(mixture(q0, rhat, 0.5) == ProbVec({0.5, 0.5}));
  CHECK_THROWS_AS(mixture(q0, rhat, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(mixture(q0, rhat, 1.1), std::invalid_argument);
}

TEST_CASE("local objective endpoints and penalty") {
  const GateInputs inputs(ProbVec({0.6, 0.4}), ProbVec({0.5, 0.5}),
                          ProbVec({0.8, 0.2}), 0.5, 1.5);
  const double ell0 = cross_entropy(inputs.p_true, inputs.q0);
  const double ellr = cross_entropy(inputs.p_true, inputs.rhat);
  CHECK(local_objective(inputs, 0.0) == ell0);
  CHECK(local_objective(inputs, 1.0) ==
        doctest::Approx(ellr + 1.5 * 0.5).epsilon(1e-12));

  // zeta = 0 reduces to the cross-entropy curve.
  const GateInputs no_penalty(inputs.p_true, inputs.q0, inputs.rhat, 0.5, 0.0);
  CHECK(local_objective(no_penalty, 0.7) ==
        doctest::Approx(cross_entropy(
            inputs.p_true, mixture(inputs.q0, inputs.rhat, 0.7)))
            .epsilon(1e-12));

  // w_fact = 1 kills the penalty at every lambda.
  const GateInputs certain(inputs.p_true, inputs.q0, inputs.rhat, 1.0, 3.0);
  CHECK(local_objective(certain, 0.7) ==
        doctest::Approx(cross_entropy(
            inputs.p_true, mixture(inputs.q0, inputs.rhat, 0.7)))
            .epsilon(1e-12));
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(GateInputs(ProbVec({1, 0}), ProbVec({1, 0, 0}),
                             ProbVec({1, 0}), 0.5, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      GateInputs(ProbVec({1, 0}), ProbVec({1, 0}), ProbVec({1, 0}), 0.0, 0.0),
      std::invalid_argument);
  CHECK_THROWS_AS(
      GateInputs(ProbVec({1, 0}), ProbVec({1, 0}), ProbVec({1, 0}), 0.5, -1.0),
      std::invalid_argument);
}

TEST_CASE("hard gate follows the two-point comparison") {
  // Retriever clearly better, no penalty.
  const ProbVec p({0.8, 0.2});
  const GateInputs better(p, ProbVec({0.4, 0.6}), p, 1.0, 1.0);
  CHECK(hard_gate(better).lambda == 1.0);

  // Exact tie stays at 0.
  const ProbVec q({0.5, 0.5});
  const GateInputs tie(p, q, q, 0.3, 2.0);
  CHECK(hard_gate(tie).lambda == 0.0);

  // Penalty dominates an otherwise better retriever.
  const GateInputs blocked(p, ProbVec({0.6, 0.4}), p, 0.5, 2.0);
  const GateDecision bd = hard_gate(blocked);
  CHECK(bd.penalty == 1.0);
  CHECK(bd.lambda == (bd.ell0 <= bd.ellr + bd.penalty ? 0.0 : 1.0));

  // Infinite retriever loss forces 0 when ell0 is finite.
  const GateInputs spiky(ProbVec({0.5, 0.5}), ProbVec({0.5, 0.5}),
                         ProbVec({1, 0}), 1.0, 0.0);
  const GateDecision sd = hard_gate(spiky);
  CHECK(sd.ellr == kInfinity);
  CHECK(sd.lambda == 0.0);

  // Infinite base loss with a finite retriever flips to 1.
  const GateInputs bad_base(ProbVec({0.5, 0.5}), ProbVec({1, 0}),
                            ProbVec({0.5, 0.5}), 1.0, 0.0);
  CHECK(hard_gate(bad_base).lambda == 1.0);
}

TEST_CASE("hard gate equals the argmin oracle with ties at zero") {
  Rng rng(derive_seed(31, 0, Stream::Test));
  for (int trial = 0; trial < 10000; ++trial) {
    const GateInputs inputs = random_inputs(rng, true);
    const double j0 = local_objective(inputs, 0.0);
    const double j1 = local_objective(inputs, 1.0);
    if (std::isinf(j0) && std::isinf(j1)) continue;
    const double expected = j0 <= j1 ? 0.0 : 1.0;
    CHECK(hard_gate(inputs).lambda == expected);
  }
}

TEST_CASE("soft gate closed-form cases") {
  // Identical distributions with a positive penalty: strictly increasing J.
  const ProbVec p({0.6, 0.4});
  const ProbVec q({0.3, 0.7});
  const GateInputs flat(p, q, q, 0.5, 1.0);
  CHECK(soft_gate(flat).lambda == 0.0);

  // Perfect retriever, no penalty: the optimum is at 1 (up to the rounding
  // residue of the boundary derivative, which is a sum of exact-cancellation
  // terms).
  const GateInputs perfect(p, ProbVec({0.45, 0.55}), p, 0.5, 0.0);
  CHECK(std::abs(soft_gate(perfect).lambda - 1.0) < 1e-6);

  // Symmetric problem: the optimum is exactly 1/2.
  const GateInputs symmetric(ProbVec({0.5, 0.5}), ProbVec({0.8, 0.2}),
                             ProbVec({0.2, 0.8}), 1.0, 0.0);
  CHECK(soft_gate(symmetric).lambda == 0.5);
}

TEST_CASE("soft gate handles an infinite retriever endpoint") {
  // rhat puts zero mass on a supported label: J(1) = inf, optimum interior
  // or zero, never 1.
  const GateInputs inputs(ProbVec({0.5, 0.5}), ProbVec({0.2, 0.8}),
                          ProbVec({1.0, 0.0}), 1.0, 0.0);
  const GateDecision d = soft_gate(inputs);
  CHECK(d.lambda < 1.0);
  CHECK(std::isinf(d.ellr));
  CHECK(local_objective(inputs, d.lambda) <
        std::min(local_objective(inputs, 0.0), 1e308));
}

TEST_CASE("soft gate rejects impossible objectives and bad tolerances") {
  const GateInputs impossible(ProbVec({0.5, 0.5}), ProbVec({1, 0}),
                              ProbVec({1, 0}), 0.5, 0.0);
  CHECK_THROWS_AS(soft_gate(impossible), std::invalid_argument);
  const GateInputs fine(ProbVec({0.5, 0.5}), ProbVec({0.6, 0.4}),
                        ProbVec({0.4, 0.6}), 0.5, 0.0);
  CHECK_THROWS_AS(soft_gate(fine, 0.0), std::invalid_argument);
}

TEST_CASE("soft gate dominates both endpoints and a lambda grid") {
  Rng rng(derive_seed(31, 1, Stream::Test));
  int tested = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const GateInputs inputs = random_inputs(rng, false);
    const GateDecision d = soft_gate(inputs);
    const double at_soft = local_objective(inputs, d.lambda);
    CHECK(at_soft <= std::min(local_objective(inputs, 0.0),
                              local_objective(inputs, 1.0)) +
                         1e-10);
    double grid_min = kInfinity;
    for (int g = 0; g <= 100; ++g) {
      grid_min = std::min(grid_min, local_objective(inputs, g / 100.0));
    }
    CHECK(at_soft <= grid_min + 1e-8);
    if (d.lambda > 0.0 && d.lambda < 1.0) {
      CHECK(std::abs(objective_derivative(inputs, d.lambda)) <= 1e-8);
      ++tested;
    }
  }
  CHECK(tested > 0);  // interior optima actually occurred
}

TEST_CASE("binary soft gate matches the closed form") {
  // With two labels and no penalty, J is minimized where the mixture's
  // first entry equals the truth's: lambda* = (p - q) / (r - q), clipped
  // to [0, 1]. An independent algebraic oracle for the bisection solver.
  Rng rng(derive_seed(31, 3, Stream::Test));
  for (int trial = 0; trial < 2000; ++trial) {
    const double p = 0.05 + 0.9 * rng.uniform01();
    const double q = 0.05 + 0.9 * rng.uniform01();
    const double r = 0.05 + 0.9 * rng.uniform01();
    if (std::abs(r - q) < 1e-3) continue;
    const double expected = std::clamp((p - q) / (r - q), 0.0, 1.0);
    const GateInputs inputs(ProbVec({p, 1 - p}), ProbVec({q, 1 - q}),
                            ProbVec({r, 1 - r}),
                            0.05 + 0.95 * rng.uniform01(), 0.0);
    const double solved = soft_gate(inputs, 1e-12).lambda;
    CHECK(std::abs(solved - expected) <= 1e-6);
  }
}

TEST_CASE("soft lambda shrinks with zeta and grows with w_fact") {
  Rng rng(derive_seed(31, 2, Stream::Test));
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t labels = 2 + rng.uniform_int(3);
    const ProbVec p = random_prob(rng, labels, false);
    const ProbVec q0 = random_prob(rng, labels, false);
    const ProbVec rhat = random_prob(rng, labels, false);

    double prev = kInfinity;
    for (double zeta : {0.0, 0.3, 0.8, 1.5, 3.0}) {
      const double lam =
          soft_gate(GateInputs(p, q0, rhat, 0.4, zeta)).lambda;
      if (!std::isinf(prev)) CHECK(lam <= prev + 1e-9);
      prev = lam;
    }

    prev = -1.0;
    for (double w : {0.1, 0.3, 0.6, 0.9, 1.0}) {
      const double lam = soft_gate(GateInputs(p, q0, rhat, w, 1.0)).lambda;
      CHECK(lam >= prev - 1e-9);
      prev = lam;
    }
  }
}
