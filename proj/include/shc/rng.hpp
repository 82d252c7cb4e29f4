#pragma once

#include <array>
#include <cmath>
#include <cstdint>

// Deterministic random number streams. Every consumer of randomness in the
// library receives an explicit 64-bit stream seed; seeds for subtasks are
// derived with chain(), so simulation b of node j always sees the stream
// chain(chain(master, j), b) no matter how work is scheduled across threads.

namespace shc::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t avalanche(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives a child stream seed; order sensitive, chainable.
constexpr std::uint64_t chain(std::uint64_t seed, std::uint64_t word) noexcept {
  return avalanche(seed + kGolden + avalanche(word ^ 0x6a09e667f3bcc909ULL));
}

// xoshiro256++ with splitmix64 seeding. Fully specified so that fixed seeds
// reproduce the same draws on every platform and at every thread count.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) noexcept {
    std::uint64_t s = seed;
    for (auto& w : state_) {
      s += kGolden;
      w = avalanche(s);
    }
  }

  std::uint64_t next() noexcept {
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

  // Uniform double in [0, 1).
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n) noexcept {
    __extension__ using uint128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<uint128>(next()) * n) >> 64);
  }

  // Standard normal via the Marsaglia polar method; one spare is cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace shc::rng
