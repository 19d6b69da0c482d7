#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace suglg {

/// Seeded random source shared by every sampler in the library.
///
/// Wraps a 64-bit Mersenne twister. All draws go through the member
/// functions so a (seed, call sequence) pair fully determines the output.
class Rng {
 public:
  using engine_type = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_(engine_); }

  double exponential() { return -std::log(uniform()); }

  /// Gamma with the given shape and unit scale.
  double gamma(double shape) {
    std::gamma_distribution<double> dist(shape, 1.0);
    return dist(engine_);
  }

  /// Derives an independent child seed; used to split streams.
  std::uint64_t split() { return engine_(); }

  engine_type& engine() { return engine_; }

 private:
  engine_type engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace suglg
