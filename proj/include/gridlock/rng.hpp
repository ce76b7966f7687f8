#pragma once

#include <cstdint>

namespace gridlock {

/// Deterministic 64-bit generator (splitmix64). All randomness in the
/// toolkit goes through this class so that results are bit-identical across
/// platforms and standard libraries; std:: distributions are avoided on
/// purpose.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    return mix(z);
  }

  /// Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double next_in(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Uniform integer in [0, n), n > 0. Rejection sampling, bias-free.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  /// Seed of the independent stream for replicate/trial `index`. Derived
  /// streams are stable under any work partitioning: stream i depends only
  /// on (master, i).
  static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return mix(mix(master) + 0x9E3779B97F4A7C15ull * (index + 1));
  }

  static Rng derived(std::uint64_t master, std::uint64_t index) {
    return Rng(derive_seed(master, index));
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace gridlock
