#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace ncgl {

// Seedable generator with a platform-independent output sequence.
//
// The engine is std::mt19937_64, whose output is fixed by the standard. The
// standard distributions are not (their algorithms are implementation
// defined), so uniforms and Gaussians are derived here from raw 64-bit draws.
// Independent streams for trial i of a run with seed s are obtained with
// Rng::stream(s, i), which mixes (s, i) through SplitMix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    return Rng(mix(seed ^ mix(index + 0x9E3779B97F4A7C15ULL)));
  }

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }

  double sign() { return (engine_() >> 63) ? 1.0 : -1.0; }

  // Standard normal via Box-Muller; the second variate is cached.
  double gaussian();

  // Complex Gaussian with E|z|^2 = 1.
  std::complex<double> complex_gaussian();

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace ncgl
