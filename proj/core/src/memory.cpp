#include "knngate/memory.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace knngate {

std::string norm_name(Norm norm) {
  switch (norm) {
    case Norm::L2: return "l2";
    case Norm::L1: return "l1";
    case Norm::Linf: return "linf";
  }
  throw std::invalid_argument("unknown norm code");
}

Norm norm_from_name(const std::string& name) {
  if (name == "l2") return Norm::L2;
  if (name == "l1") return Norm::L1;
  if (name == "linf") return Norm::Linf;
  throw std::invalid_argument("unknown norm name: " + name);
}

double point_distance(std::span<const double> a, std::span<const double> b,
                      Norm norm) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("point dimension mismatch");
  }
  switch (norm) {
    case Norm::L2: {
      double acc = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        acc += diff * diff;
      }
      return std::sqrt(acc);
    }
    case Norm::L1: {
      double acc = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
      return acc;
    }
    case Norm::Linf: {
      double acc = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        acc = std::max(acc, std::abs(a[i] - b[i]));
      }
      return acc;
    }
  }
  throw std::invalid_argument("unknown norm code");
}

MemoryStore::MemoryStore(std::vector<double> points, std::size_t dim,
                         std::vector<Label> labels, std::size_t num_labels,
                         Norm norm)
    : points_(std::move(points)),
      dim_(dim),
      labels_(std::move(labels)),
      num_labels_(num_labels),
      norm_(norm) {
  if (labels_.empty()) throw std::invalid_argument("store needs n >= 1");
  if (dim_ == 0) throw std::invalid_argument("store needs d >= 1");
  if (points_.size() != labels_.size() * dim_) {
    throw std::invalid_argument("points size is not n * d");
  }
  if (num_labels_ == 0) throw std::invalid_argument("store needs C >= 1");
  for (Label v : labels_) {
    if (v < 1 || v > num_labels_) {
      throw std::invalid_argument("store label out of range 1..C");
    }
  }
}

NeighborSet knn_query(const MemoryStore& store, std::span<const double> x,
                      std::size_t k) {
  const std::size_t n = store.size();
  if (k < 1 || k > n) {
    throw std::invalid_argument("k must satisfy 1 <= k <= n (k=" +
                                std::to_string(k) + ", n=" + std::to_string(n) +
                                ")");
  }
  if (x.size() != store.dim()) {
    throw std::invalid_argument("query dimension mismatch");
  }

  // Exact linear scan; the (distance, index) order is total, so the selected
  // prefix is independent of the selection algorithm.
  std::vector<std::pair<double, std::size_t>> scored(n);
  for (std::size_t i = 0; i < n; ++i) {
    scored[i] = {point_distance(x, store.point(i), store.norm()), i};
  }
  if (k < n) {
    std::nth_element(scored.begin(), scored.begin() + (k - 1), scored.end());
  }
  std::sort(scored.begin(), scored.begin() + k);

  NeighborSet out;
  out.indices.reserve(k);
  out.distances.reserve(k);
  out.labels.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    out.indices.push_back(scored[j].second);
    out.distances.push_back(scored[j].first);
    out.labels.push_back(store.label(scored[j].second));
  }
  return out;
}

double knn_radius(const NeighborSet& neighbors) {
  if (neighbors.size() == 0) {
    throw std::invalid_argument("empty neighbor set has no radius");
  }
  return neighbors.distances.back();
}

namespace {

constexpr char kMagic[4] = {'K', 'N', 'N', 'M'};
constexpr std::uint32_t kVersion = 1;

void write_bytes(std::ostream& out, const void* data, std::size_t size) {
  out.write(static_cast<const char*>(data), std::streamsize(size));
}

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  write_bytes(out, bytes, sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!in) throw std::runtime_error("truncated store file");
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void save_store(const MemoryStore& store, std::ostream& out) {
  write_bytes(out, kMagic, 4);
  write_le<std::uint32_t>(out, kVersion);
  write_le<std::uint32_t>(out, std::uint32_t(store.dim()));
  write_le<std::uint64_t>(out, std::uint64_t(store.size()));
  write_le<std::uint32_t>(out, std::uint32_t(store.num_labels()));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(store.norm()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    for (double v : store.point(i)) write_le<double>(out, v);
  }
  for (std::size_t i = 0; i < store.size(); ++i) {
    write_le<std::uint32_t>(out, store.label(i));
  }
  if (!out) throw std::runtime_error("failed writing store");
}

void save_store_file(const MemoryStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  save_store(store, out);
}

MemoryStore load_store(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("not a memory store file (bad magic)");
  }
  const auto version = read_le<std::uint32_t>(in);
  if (version != kVersion) {
    throw std::runtime_error("unsupported store version " +
                             std::to_string(version));
  }
  const auto dim = read_le<std::uint32_t>(in);
  const auto n = read_le<std::uint64_t>(in);
  const auto num_labels = read_le<std::uint32_t>(in);
  const auto norm_code = read_le<std::uint32_t>(in);
  if (norm_code > 2) throw std::runtime_error("bad norm code in store file");

  std::vector<double> points(static_cast<std::size_t>(n) * dim);
  for (double& v : points) v = read_le<double>(in);
  std::vector<Label> labels(static_cast<std::size_t>(n));
  for (Label& v : labels) v = read_le<std::uint32_t>(in);

  return MemoryStore(std::move(points), dim, std::move(labels), num_labels,
                     static_cast<Norm>(norm_code));
}

MemoryStore load_store_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open store file: " + path);
  return load_store(in);
}

}  // namespace knngate
