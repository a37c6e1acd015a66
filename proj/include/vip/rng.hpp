#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace vip {

// splitmix64: stateless integer mixer used for coordinate hashing in the
// synthetic scene generator.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t seed, uint64_t v) {
  return splitmix64(seed ^ (v + 0x9e3779b97f4a7c15ULL));
}

// Hash of lattice coordinates to [0,1). Signed coordinates are cast through
// uint64 so panned (negative) lattice cells stay well defined.
inline double hash_unit(uint64_t seed, int64_t ix, int64_t iy, uint64_t tag) {
  uint64_t h = hash_combine(seed, tag);
  h = hash_combine(h, static_cast<uint64_t>(ix));
  h = hash_combine(h, static_cast<uint64_t>(iy));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Seeded generator: mt19937_64 for bits, explicit scaling for uniforms and
// Box-Muller for normals. Distribution code is spelled out here instead of
// using <random> distributions, which are implementation-defined and would
// break run-to-run reproducibility across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1]: keeps log() finite
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace vip
