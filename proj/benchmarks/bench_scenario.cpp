#include <benchmark/benchmark.h>

#include "knngate/scenario.hpp"

namespace {

knngate::Scenario make_scenario() {
  return knngate::Scenario(
      2, 3, knngate::BallLaw{1.0},
      knngate::SoftmaxConditional{{{2.0, 0.0}, {-1.0, 1.6}, {-1.0, -1.6}},
                                  {0.0, 0.0, 0.0}},
      knngate::Q0Contaminated{0.5}, std::monostate{}, 0.0,
      knngate::SpuriousUniform{});
}

void BM_sample_memory(benchmark::State& state) {
  const knngate::Scenario scenario = make_scenario();
  const std::size_t n = std::size_t(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(knngate::sample_memory(scenario, n, seed++));
  }
  state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(n));
}
BENCHMARK(BM_sample_memory)->Arg(2000)->Arg(20000);

void BM_conditional_at(benchmark::State& state) {
  const knngate::Scenario scenario = make_scenario();
  const std::vector<double> x{0.3, 0.15};
  for (auto _ : state) {
    benchmark::DoNotOptimize(knngate::conditional_at(scenario, x));
  }
}
BENCHMARK(BM_conditional_at);

}  // namespace
