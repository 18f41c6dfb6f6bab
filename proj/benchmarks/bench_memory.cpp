#include <benchmark/benchmark.h>

#include "knngate/memory.hpp"
#include "knngate/retrieval.hpp"
#include "knngate/rng.hpp"

namespace {

knngate::MemoryStore make_store(std::size_t n, std::size_t d) {
  knngate::Rng rng(knngate::derive_seed(99, n, knngate::Stream::Test));
  std::vector<double> points(n * d);
  for (double& v : points) v = rng.uniform(-1.0, 1.0);
  std::vector<knngate::Label> labels(n);
  for (knngate::Label& v : labels) {
    v = knngate::Label(1 + rng.uniform_int(3));
  }
  return knngate::MemoryStore(std::move(points), d, std::move(labels), 3);
}

void BM_knn_query(benchmark::State& state) {
  const std::size_t n = std::size_t(state.range(0));
  const std::size_t k = std::size_t(state.range(1));
  const knngate::MemoryStore store = make_store(n, 2);
  const std::vector<double> x{0.1, -0.2};
  for (auto _ : state) {
    benchmark::DoNotOptimize(knngate::knn_query(store, x, k));
  }
  state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(n));
}
BENCHMARK(BM_knn_query)
    ->Args({2000, 96})
    ->Args({20000, 381})
    ->Args({200000, 1516});

void BM_retrieve(benchmark::State& state) {
  const std::size_t n = std::size_t(state.range(0));
  const knngate::MemoryStore store = make_store(n, 2);
  const std::vector<double> x{0.1, -0.2};
  for (auto _ : state) {
    benchmark::DoNotOptimize(knngate::retrieve(store, x, 100));
  }
}
BENCHMARK(BM_retrieve)->Arg(10000)->Arg(100000);

}  // namespace
