#pragma once

#include <span>

#include "knngate/memory.hpp"
#include "knngate/prob.hpp"

namespace knngate {

/// One retrieval's view of a query: the empirical label distribution, the
/// trust weight computed from the same neighbor set, the k-NN radius, and k.
struct RetrievalView {
  ProbVec rhat;
  double w_fact;
  double radius;
  std::size_t k;
};

/// Empirical label frequencies among the retrieved neighbors; every entry is
/// an integer multiple of 1/k.
ProbVec retriever_distribution(const NeighborSet& neighbors,
                               std::size_t num_labels);

/// Mean of exp(-(d_j / bandwidth)^2) over the neighbor distances. With the
/// default bandwidth 1 this is the plain squared-exponential trust weight.
/// Lies in (0, 1]; equals 1 exactly when all distances are zero.
double trust_weight(const NeighborSet& neighbors, double bandwidth = 1.0);

/// Single retrieval per query: r-hat and w_fact always come from the same
/// neighbor set.
RetrievalView retrieve(const MemoryStore& store, std::span<const double> x,
                       std::size_t k, double bandwidth = 1.0);

}  // namespace knngate
