#pragma once

#include <cmath>
#include <cstdint>

#include "jnr/vec3.hpp"

namespace jnr {

// Deterministic random stream. We avoid std::uniform_real_distribution and
// std::normal_distribution because their output is implementation-defined;
// results here are bit-stable across standard libraries.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0) {
    // splitmix64 mixing so that nearby (seed, stream) pairs decorrelate.
    state_ = mix(seed + 0x9E3779B97F4A7C15ULL * (stream + 1));
    if (state_ == 0) state_ = 0x106689D45497FDB5ULL;
  }

  std::uint64_t next_u64() {
    // xorshift64*; period 2^64-1, plenty for sampling duty.
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545F4914F6CDD1DULL;
  }

  // Uniform in [0, 1).
  double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller (pair cached).
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform direction on the unit sphere.
  Vec3 unit_vec3() {
    Vec3 v{gaussian(), gaussian(), gaussian()};
    double n = v.norm();
    if (n < 1e-12) return {1.0, 0.0, 0.0};
    return v / n;
  }

private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

} // namespace jnr
