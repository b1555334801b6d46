#include "ppgbench/random.hpp"

#include <cmath>
#include <numbers>

namespace ppgbench {

std::uint64_t hash_string(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> counters) noexcept {
  std::uint64_t h = mix64(base);
  for (std::uint64_t c : counters) {
    h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
  }
  return h;
}

Rng::Rng(std::uint64_t seed) noexcept {
  std::uint64_t sm = seed;
  for (auto& word : s_) {
    sm += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = sm;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    word = z ^ (z >> 31);
  }
}

Rng::Rng(std::uint64_t seed, Stream stream) noexcept
    : Rng(derive_seed(seed, {static_cast<std::uint64_t>(stream)})) {}

double Rng::normal() noexcept {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  // u1 in (0, 1] keeps the log finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

double Rng::exponential(double rate) noexcept {
  return -std::log(1.0 - uniform()) / rate;
}

}  // namespace ppgbench
