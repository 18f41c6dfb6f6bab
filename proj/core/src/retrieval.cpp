#include "knngate/retrieval.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace knngate {

ProbVec retriever_distribution(const NeighborSet& neighbors,
                               std::size_t num_labels) {
  const std::size_t k = neighbors.size();
  if (k == 0) throw std::invalid_argument("empty neighbor set");
  std::vector<double> counts(num_labels, 0.0);
  for (Label v : neighbors.labels) {
    if (v < 1 || v > num_labels) {
      throw std::invalid_argument("neighbor label " + std::to_string(v) +
                                  " out of range 1.." +
                                  std::to_string(num_labels));
    }
    counts[v - 1] += 1.0;
  }
  for (double& c : counts) c /= double(k);
  return ProbVec(std::move(counts));
}

double trust_weight(const NeighborSet& neighbors, double bandwidth) {
  if (neighbors.size() == 0) throw std::invalid_argument("empty neighbor set");
  if (!(bandwidth > 0.0)) {
    throw std::invalid_argument("bandwidth must be positive");
  }
  double acc = 0.0;
  for (double d : neighbors.distances) {
    const double scaled = d / bandwidth;
    acc += std::exp(-scaled * scaled);
  }
  return acc / double(neighbors.size());
}

RetrievalView retrieve(const MemoryStore& store, std::span<const double> x,
                       std::size_t k, double bandwidth) {
  NeighborSet neighbors = knn_query(store, x, k);
  return RetrievalView{
      retriever_distribution(neighbors, store.num_labels()),
      trust_weight(neighbors, bandwidth),
      knn_radius(neighbors),
      k,
  };
}

}  // namespace knngate
