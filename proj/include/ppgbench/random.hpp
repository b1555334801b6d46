#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace ppgbench {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// 64-bit FNV-1a over the bytes of `text`.
std::uint64_t hash_string(std::string_view text) noexcept;

/// Counter-based seed derivation: the result depends only on the arguments,
/// never on the order in which seeds are requested. Used to give every
/// frame, case and repetition its own independent stream.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> counters) noexcept;

/// Named sub-streams so that enabling one random effect never perturbs the
/// draws of another.
enum class Stream : std::uint64_t {
  Synth = 1,
  Noise = 2,
  Dither = 3,
  Drops = 4,
  Jitter = 5,
  SensorNoise = 6,
  Bootstrap = 7,
  Video = 8,
  Degrade = 9,
  Motion = 10,
};

/// xoshiro256** seeded through SplitMix64. Satisfies
/// UniformRandomBitGenerator, but the distribution helpers below are used
/// instead of <random> distributions because the latter are not
/// bit-reproducible across standard library implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept;
  Rng(std::uint64_t seed, Stream stream) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Standard normal draw (Box-Muller, second variate cached).
  double normal() noexcept;

  /// Exponential draw with the given rate (events per unit).
  double exponential(double rate) noexcept;

  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace ppgbench
