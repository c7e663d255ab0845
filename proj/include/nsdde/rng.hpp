#pragma once

// Deterministic random streams.
//
// Reproducibility contract (stable across releases, stated again in the README):
//   splitmix64(s): s += 0x9E3779B97F4A7C15; z = s;
//                  z = (z ^ z>>30) * 0xBF58476D1CE4E5B9;
//                  z = (z ^ z>>27) * 0x94D049BB133111EB; return z ^ z>>31.
//   stream_seed(master, index, tag):
//     a = splitmix64 step applied to master
//     b = splitmix64 step applied to (a ^ 0x9E3779B97F4A7C15 * (index + 1))
//     c = splitmix64 step applied to (b ^ 0xD1B54A32D192ED03 * (tag + 1))
//   c seeds a std::mt19937_64 engine. Tags: 1 Brownian increments, 2 jump
//   realization, 3 bootstrap resampling.
// Gaussians come from the Marsaglia polar method on top of the engine's
// 53-bit uniforms, two deviates per acceptance, first one returned first.

#include <cstdint>
#include <random>

namespace nsdde {

inline std::uint64_t splitmix64_step(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace stream_tag {
inline constexpr std::uint64_t brownian = 1;
inline constexpr std::uint64_t jumps = 2;
inline constexpr std::uint64_t bootstrap = 3;
}  // namespace stream_tag

inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index, std::uint64_t tag) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64_step(s);
  s = a ^ (0x9E3779B97F4A7C15ULL * (index + 1));
  std::uint64_t b = splitmix64_step(s);
  s = b ^ (0xD1B54A32D192ED03ULL * (tag + 1));
  return splitmix64_step(s);
}

// One seeded stream: uniforms, polar Gaussians, small Poisson counts.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  // [0,1), 53-bit resolution.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // (0,1), safe under log().
  double uniform01_open() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Unbiased integer in [0, n) via 128-bit multiply (n comfortably below 2^32 here).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(eng_()) * n) >> 64);
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  // Exact Poisson sampling; large means split into independent chunks,
  // valid because sums of independent Poisson variates stay Poisson.
  std::uint64_t poisson(double mean) {
    std::uint64_t n = 0;
    while (mean > 30.0) {
      n += poisson_small(30.0);
      mean -= 30.0;
    }
    return n + poisson_small(mean);
  }

 private:
  std::uint64_t poisson_small(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01_open();
    } while (p > limit);
    return k - 1;
  }

  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nsdde
