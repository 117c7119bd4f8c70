#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace mecoff {

/// Deterministic pseudo-random stream.
///
/// Wraps std::mt19937_64 but performs all real-valued transforms itself
/// (bit-shift uniforms, Box-Muller normals) so that a given seed produces
/// the same sequence on every platform. Every stochastic operation in the
/// library takes either an explicit seed or a Prng built from one.
class Prng {
 public:
  explicit Prng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Integer in [lo, hi] via rejection-free modular draw (bias negligible
  /// for the ranges used here, but we reject to keep it exact).
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo + 1;
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return lo + x % span;
  }

  /// Standard normal via Box-Muller; caches the paired deviate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Derives an independent child seed from (seed, tag, index).
///
/// Used to split one experiment seed into the named streams (environment
/// draws, quantizer noise, batch sampling, evaluation states, ...) without
/// any stream ever sharing state with another.
inline std::uint64_t derive_stream(std::uint64_t seed, std::string_view tag,
                                   std::uint64_t index = 0) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a over the tag
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  std::uint64_t state = seed ^ h;
  detail::splitmix64(state);
  state ^= index * 0x9e3779b97f4a7c15ull;
  std::uint64_t out = detail::splitmix64(state);
  return out ? out : 0x1ull;
}

}  // namespace mecoff
