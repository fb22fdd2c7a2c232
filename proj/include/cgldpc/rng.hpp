#pragma once
#include <cstdint>

namespace cgldpc {

// SplitMix64 (Steele, Lea, Vigna): tiny splittable generator with a single
// 64-bit counter state.  Used everywhere randomness is needed so that runs
// are reproducible across platforms from a documented algorithm.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // [0, 1), 53-bit resolution
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }
  // (0, 1]
  double uniform_pos() { return double((next() >> 11) + 1) * 0x1.0p-53; }
  // uniform integer in [0, bound)
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }
  bool bit() { return (next() >> 63) != 0; }

 private:
  std::uint64_t state_;
};

// Standard Gaussian via Box-Muller on SplitMix64 uniforms.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

  double next();

 private:
  SplitMix64 rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cgldpc
