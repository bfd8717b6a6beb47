#pragma once

// Deterministic random number generation.
//
// Every random quantity in a run is derived from one 64-bit run seed through
// derive_seed(), so any piece of the pipeline can be replayed in isolation.
// The generator and the Gaussian sampler are pinned here rather than taken
// from <random> because the standard library does not specify distribution
// algorithms, and checkpoint hashes must not depend on the toolchain.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace evoimit {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Bijective on uint64.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Stream tags for the documented seed derivation tree:
//   derive_seed(run_seed, {domain, generation, pop_tag, index, ...})
enum class SeedDomain : std::uint64_t {
  Variation = 1,  // (domain, generation, population_tag, member_index)
  Pairing = 2,    // (domain, generation, pairing_round)
  MatchEnv = 3,   // (domain, generation, retry)
  Holdout = 4,    // (domain, holdout_index)
  Export = 5,     // (domain, retry)
  CliEval = 6,    // (domain, eval_index, retry)
};

inline std::uint64_t derive_seed(std::uint64_t root,
                                 std::initializer_list<std::uint64_t> tokens) {
  std::uint64_t h = mix64(root ^ 0x6A09E667F3BCC908ULL);
  for (std::uint64_t t : tokens) {
    h = mix64(h ^ mix64(t));
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t root, SeedDomain domain,
                                 std::initializer_list<std::uint64_t> tokens) {
  std::uint64_t h = mix64(root ^ 0x6A09E667F3BCC908ULL);
  h = mix64(h ^ mix64(static_cast<std::uint64_t>(domain)));
  for (std::uint64_t t : tokens) {
    h = mix64(h ^ mix64(t));
  }
  return h;
}

// SplitMix64 stream. State advances by the golden-gamma increment; output is
// the mixed counter, so streams from distinct seeds are effectively
// independent counters.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return mix64(state_ += kGamma); }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1]; safe as a log() argument.
  double next_unit_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double next_uniform(double lo, double hi) {
    return lo + next_unit() * (hi - lo);
  }

  // Standard normal via the Box-Muller transform (cosine branch). Two
  // uniforms per draw, no rejection, no cached spare: the draw count per
  // sample is fixed, which keeps derived streams easy to reason about.
  double next_gaussian() {
    const double u1 = next_unit_open();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform in [0, n) by the multiply-shift reduction; bias is O(n / 2^64).
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  std::uint64_t state_;
};

}  // namespace evoimit
