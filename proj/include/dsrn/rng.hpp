// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace dsrn {

// splitmix64, used to derive independent sub-seeds from a master seed.
inline uint64_t splitmix64(uint64_t &state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a over a string, mixed with a seed. Gives stable per-utterance seeds
// that do not depend on stdlib hash internals.
inline uint64_t hash_seed(uint64_t seed, const std::string &key) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  uint64_t s = seed ^ h;
  return splitmix64(s);
}

// Deterministic RNG with explicit value derivations. Avoids std::*_distribution
// so the byte stream of every run depends only on the seed, not the stdlib.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {
    // warm up so nearby seeds decorrelate
    next();
    next();
  }

  uint64_t next() { return splitmix64(state_); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  uint64_t uniform_int(uint64_t n) { return n == 0 ? 0 : next() % n; }

  // standard normal via Box-Muller
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  Rng fork(uint64_t stream) {
    uint64_t s = state_ ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    return Rng(splitmix64(s));
  }

 private:
  uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace dsrn
