#include <benchmark/benchmark.h>

#include "knngate/discordance.hpp"
#include "knngate/gating.hpp"
#include "knngate/rng.hpp"

namespace {

std::vector<knngate::GateInputs> make_inputs(std::size_t count,
                                             std::size_t labels) {
  knngate::Rng rng(knngate::derive_seed(98, count, knngate::Stream::Test));
  const auto draw = [&] {
    std::vector<double> w(labels);
    double sum = 0.0;
    for (double& v : w) {
      v = 0.01 + rng.uniform01();
      sum += v;
    }
    for (double& v : w) v /= sum;
    return knngate::ProbVec(w);
  };
  std::vector<knngate::GateInputs> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.emplace_back(draw(), draw(), draw(), 0.1 + 0.9 * rng.uniform01(),
                     rng.uniform01());
  }
  return out;
}

void BM_hard_gate(benchmark::State& state) {
  const auto inputs = make_inputs(512, std::size_t(state.range(0)));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(knngate::hard_gate(inputs[i++ % inputs.size()]));
  }
}
BENCHMARK(BM_hard_gate)->Arg(3)->Arg(16);

void BM_soft_gate(benchmark::State& state) {
  const auto inputs = make_inputs(512, std::size_t(state.range(0)));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(knngate::soft_gate(inputs[i++ % inputs.size()]));
  }
}
BENCHMARK(BM_soft_gate)->Arg(3)->Arg(16);

void BM_realized_delta_h(benchmark::State& state) {
  const auto inputs = make_inputs(512, 3);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        knngate::realized_delta_h(inputs[i++ % inputs.size()]));
  }
}
BENCHMARK(BM_realized_delta_h);

}  // namespace
