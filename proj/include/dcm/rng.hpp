#pragma once

#include <cstdint>
#include <string_view>

namespace dcm {

// SplitMix64 generator. <random> distributions are implementation-defined,
// so every draw that must reproduce bit-for-bit across platforms goes
// through this class instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();

  // Uniform integer in [0, n). n must be > 0. Rejection sampling, no
  // modulo bias.
  std::uint64_t bounded(std::uint64_t n);

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform01();

  double uniform(double lo, double hi);

  // Inverse-CDF exponential with the given rate (> 0).
  double exponential(double rate);

  // Box-Muller; the spare draw is cached.
  double normal(double mean, double sd);

  // Knuth product method; intended for small means (lambda < ~50).
  int poisson(double lambda);

 private:
  std::uint64_t state_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t fnv1a64(std::string_view bytes);

// Scrambles two seeds into one; order matters.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// Independent stream for (global seed, string key): selection stays
// reproducible no matter which worker handles which unit of work.
Rng derive_rng(std::uint64_t global_seed, std::string_view key);
Rng derive_rng(std::uint64_t global_seed, std::uint64_t index);

}  // namespace dcm
