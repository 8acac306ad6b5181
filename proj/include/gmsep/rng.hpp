#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace gmsep {

/// Seeded random stream. All variates are derived from a 64-bit Mersenne
/// twister through code in this library, so output is identical across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent child generator; the seed is hashed with the index so
  /// that children of nearby seeds do not collide.
  Rng stream(std::uint64_t stream_index) const { return Rng(mix(seed_ ^ mix(stream_index + 0x9e3779b97f4a7c15ULL))); }

  static std::uint64_t mix(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open_zero() { return 1.0 - uniform(); }

  /// Index uniform in [0, n).
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via the Box-Muller transform.
  double normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang.
  double gamma(double shape);

  /// Chi-square with `dof` degrees of freedom (dof may be large).
  double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

  /// Index drawn with probability proportional to weights[i].
  std::size_t categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gmsep
