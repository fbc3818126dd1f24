// SPDX-License-Identifier: Apache-2.0
//
// Deterministic random number generation for reproducible experiments.
//
// All randomness in the library flows through Rng, a xoshiro256++ generator
// seeded from a single 64-bit value via the splitmix64 stream. The Gaussian
// sampler uses the Marsaglia polar method with a polynomial log so the
// produced streams depend only on IEEE-754 double arithmetic, not on the
// platform's libm.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace anonlink {

inline constexpr std::uint64_t kSplitmix64Gamma = 0x9E3779B97F4A7C15ULL;

// Advances `state` by one splitmix64 step and returns the mixed output.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += kSplitmix64Gamma);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Per-trial seed derivation: a fixed chain of splitmix64 steps folding in
// the cell coordinates. Documented in the README; the sweep results are a
// pure function of these seeds, independent of execution order.
//
//   h0 = sm(master); h1 = sm(h0 ^ a); h2 = sm(h1 ^ b); h3 = sm(h2 ^ c)
//
// where sm(x) advances x by one splitmix64 step.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a,
                              std::uint64_t b, std::uint64_t c) {
  std::uint64_t s = master;
  std::uint64_t h = splitmix64_next(s);
  s = h ^ a;
  h = splitmix64_next(s);
  s = h ^ b;
  h = splitmix64_next(s);
  s = h ^ c;
  h = splitmix64_next(s);
  return h;
}

// Natural log built from frexp plus an atanh series with fixed double
// coefficients. Accurate to a few ulp on (0, inf); every operation rounds
// per IEEE-754, so results are identical on any conforming platform.
inline double portable_log(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::domain_error("portable_log: requires finite x > 0");
  }
  int e = 0;
  double m = std::frexp(x, &e);  // x = m * 2^e, m in [0.5, 1)
  if (m < 0.70710678118654752440) {
    m *= 2.0;
    --e;
  }
  const double t = (m - 1.0) / (m + 1.0);
  const double t2 = t * t;
  static constexpr double kCoef[] = {
      1.0 / 23, 1.0 / 21, 1.0 / 19, 1.0 / 17, 1.0 / 15, 1.0 / 13,
      1.0 / 11, 1.0 / 9,  1.0 / 7,  1.0 / 5,  1.0 / 3,  1.0};
  double s = 0.0;
  for (double c : kCoef) s = s * t2 + c;
  return 2.0 * t * s + static_cast<double>(e) * 0.69314718055994530942;
}

// xoshiro256++ with splitmix64 seeding.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64_next(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via the Marsaglia polar method; one spare is cached.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * portable_log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace anonlink
