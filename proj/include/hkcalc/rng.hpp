#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hkcalc {

/// Seeded generator used for every randomized check. `split` derives an
/// independent child stream from a label so adding a test does not shift the
/// streams of the others.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  Rng split(std::string_view label) const {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : label) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    return Rng(mix(seed_ ^ h));
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  std::size_t index(std::size_t lo, std::size_t hi_inclusive) {
    return std::uniform_int_distribution<std::size_t>(lo, hi_inclusive)(engine_);
  }
  bool coin() { return index(0, 1) == 1; }

  std::mt19937_64& engine() noexcept { return engine_; }

private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace hkcalc
