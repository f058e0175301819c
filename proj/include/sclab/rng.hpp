#pragma once

#include <cstdint>
#include <random>

namespace sclab {

/// Seeded random stream. All generators take one of these (or a raw seed);
/// there is no global RNG state anywhere in the library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  double normal(double stddev) { return std::normal_distribution<double>(0.0, stddev)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  bool bernoulli(double p) { return std::bernoulli_distribution(p)(engine_); }
  std::uint64_t uniform_index(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Seed for an independent sub-stream (MC trial i uses derive_seed(seed, i)).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return seed + stream;
}

}  // namespace sclab
