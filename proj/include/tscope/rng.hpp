/**
 * @file rng.hpp
 * @brief Deterministic splitmix64 sampling. Identical seeds give identical
 *        streams on every platform, which the search tools rely on.
 */
#pragma once

#include <cmath>
#include <cstdint>

#include "tscope/types.hpp"

namespace tscope {

struct Rng {
  std::uint64_t state = 0;

  explicit Rng(std::uint64_t seed = 0) : state(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller; one value per call, no cached spare.
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Uniform point in the n-ball of given radius around a center:
  /// normalized Gaussian direction scaled by radius * U^(1/n).
  State in_ball(const State& center, double radius) {
    const std::size_t n = center.size();
    State dir(n);
    double nrm = 0.0;
    do {
      for (std::size_t i = 0; i < n; ++i) dir[i] = normal();
      nrm = norm2(dir);
    } while (nrm == 0.0);
    const double r = radius * std::pow(uniform01(), 1.0 / static_cast<double>(n));
    State out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = center[i] + r * dir[i] / nrm;
    return out;
  }
};

/// Derives an independent sub-stream seed from a base seed and stream indices.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  Rng r(seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xd1b54a32d192ed03ULL));
  r.next_u64();
  return r.next_u64();
}

}  // namespace tscope
