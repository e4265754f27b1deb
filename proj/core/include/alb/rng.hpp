#pragma once

#include <cmath>
#include <cstdint>

// Counter-based randomness. Every draw is a pure function of a 64-bit key,
// so trials, sites and sub-streams can be evaluated in any order (or in
// parallel) and still reproduce bit-identical results.
namespace alb::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derived stream key: used for per-trial and per-site sub-streams.
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ (0x517cc1b727220a95ULL * (index + 1)));
}

inline std::uint64_t mix(std::uint64_t a, std::int64_t b) {
  return splitmix64(a ^ static_cast<std::uint64_t>(b) * 0x2545f4914f6cdd1dULL);
}

// Uniform double in [0,1).
inline double uniform01(std::uint64_t key) {
  return static_cast<double>(key >> 11) * 0x1.0p-53;
}

// Fair sign derived from a key.
inline int sign(std::uint64_t key) { return (key >> 63) ? 1 : -1; }

// Standard normal via Box-Muller on two derived uniforms.
inline double gaussian(std::uint64_t key) {
  double u1 = uniform01(splitmix64(key));
  double u2 = uniform01(splitmix64(key ^ 0xda3e39cb94b95bdbULL));
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

// A small sequential generator for places that want a stream.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() { return state_ = splitmix64(state_); }
  double next_uniform() { return uniform01(next()); }
  int next_sign() { return sign(next()); }
  double next_gaussian() { return gaussian(next()); }

 private:
  std::uint64_t state_;
};

}  // namespace alb::rng
