#include "knngate/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace knngate {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index,
                          Stream stream) {
  std::uint64_t s = splitmix64(master_seed);
  s = splitmix64(s ^ index);
  s = splitmix64(s ^ static_cast<std::uint64_t>(stream));
  return s;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform01();
  while (u1 == 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  have_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t Rng::uniform_int(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_int bound must be >= 1");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t draw = eng_();
  while (draw >= limit) draw = eng_();
  return draw % bound;
}

Label Rng::categorical(const ProbVec& p) {
  const double u = uniform01();
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < p.num_labels(); ++i) {
    cum += p[i];
    if (u < cum) return static_cast<Label>(i + 1);
  }
  return static_cast<Label>(p.num_labels());
}

}  // namespace knngate
