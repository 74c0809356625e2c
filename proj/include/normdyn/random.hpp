#pragma once

#include <array>
#include <concepts>
#include <cstdint>
#include <limits>
#include <random>

namespace normdyn {

// SplitMix64, used to expand a 64-bit seed into engine state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// xoshiro256** (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed = 0) {
    SplitMix64 sm(seed);
    for (auto& w : s_) w = sm.next();
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
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

  friend bool operator==(const Xoshiro256&, const Xoshiro256&) = default;

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> s_{};
};

// Default engine for every stream in the library. All draws go through the
// helpers below, never through std:: distributions, so traces do not depend
// on the standard library implementation.
using Engine = Xoshiro256;

template <class G>
concept BitGenerator64 =
    std::uniform_random_bit_generator<G> &&
    std::same_as<typename G::result_type, std::uint64_t> && G::min() == 0 &&
    G::max() == std::numeric_limits<std::uint64_t>::max();

// Uniform on [0, 1) with 53 bits of resolution. One draw.
template <BitGenerator64 G>
inline double uniform01(G& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Uniform on [lo, hi). One draw.
template <BitGenerator64 G>
inline double uniform(G& gen, double lo, double hi) {
  return lo + (hi - lo) * uniform01(gen);
}

// Difference of two independent uniforms on [0, 1), each with 32 bits of
// resolution, taken from the two halves of a single draw.
template <BitGenerator64 G>
inline double uniform_difference(G& gen) {
  const std::uint64_t x = gen();
  const double a = static_cast<double>(x >> 32) * 0x1.0p-32;
  const double b = static_cast<double>(x & 0xffffffffULL) * 0x1.0p-32;
  return a - b;
}

// Unbiased integer in [0, n) (Lemire's multiply-shift with rejection).
template <BitGenerator64 G>
inline std::uint64_t uniform_index(G& gen, std::uint64_t n) {
  std::uint64_t x = gen();
  unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = gen();
      m = static_cast<unsigned __int128>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

template <BitGenerator64 G>
inline bool bernoulli(G& gen, double p) {
  return uniform01(gen) < p;
}

// Independent stream derived from a base seed and a tag, e.g. one per run or
// one for measurement passes that must not perturb the dynamics stream.
inline Engine derive_engine(std::uint64_t seed, std::uint64_t tag) {
  SplitMix64 mix(seed ^ SplitMix64(tag).next());
  return Engine(mix.next());
}

}  // namespace normdyn
