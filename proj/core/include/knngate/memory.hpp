#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "knngate/prob.hpp"

namespace knngate {

enum class Norm : std::uint32_t { L2 = 0, L1 = 1, Linf = 2 };

std::string norm_name(Norm norm);
Norm norm_from_name(const std::string& name);

/// Distance between two points of equal dimension under the given norm.
double point_distance(std::span<const double> a, std::span<const double> b,
                      Norm norm);

/// Result of a k-nearest-neighbor query. Distances are nondecreasing; among
/// exactly equal distances, store indices are strictly increasing.
struct NeighborSet {
  std::vector<std::size_t> indices;
  std::vector<double> distances;
  std::vector<Label> labels;

  std::size_t size() const { return indices.size(); }
};

/// Immutable store of n labeled points in R^d with exact k-NN queries.
///
/// Ties are broken deterministically by ascending store index; distances are
/// compared exactly as computed, with no epsilon widening. Safe for
/// unrestricted concurrent queries.
class MemoryStore {
 public:
  /// points: row-major n x d. labels: n values in 1..num_labels.
  MemoryStore(std::vector<double> points, std::size_t dim,
              std::vector<Label> labels, std::size_t num_labels,
              Norm norm = Norm::L2);

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t num_labels() const { return num_labels_; }
  Norm norm() const { return norm_; }

  std::span<const double> point(std::size_t i) const {
    return {points_.data() + i * dim_, dim_};
  }
  Label label(std::size_t i) const { return labels_[i]; }

 private:
  std::vector<double> points_;
  std::size_t dim_;
  std::vector<Label> labels_;
  std::size_t num_labels_;
  Norm norm_;
};

/// Exact k nearest neighbors of x under the store norm, 1 <= k <= n.
NeighborSet knn_query(const MemoryStore& store, std::span<const double> x,
                      std::size_t k);

/// The k-NN radius R_k(x): distance to the farthest retrieved neighbor.
double knn_radius(const NeighborSet& neighbors);

/// Binary store format, little-endian:
///   magic "KNNM", u32 version (1), u32 d, u64 n, u32 C, u32 norm code,
///   then n*d f64 coordinates (row-major), then n u32 labels.
void save_store(const MemoryStore& store, std::ostream& out);
void save_store_file(const MemoryStore& store, const std::string& path);
MemoryStore load_store(std::istream& in);
MemoryStore load_store_file(const std::string& path);

}  // namespace knngate
