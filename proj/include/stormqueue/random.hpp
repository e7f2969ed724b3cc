// Seeded random streams. Every consumer derives its own substream from a
// master seed plus stream tags, so results do not depend on thread schedule.
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace stormqueue {

inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Mixes a master seed with stream tags into an independent 64-bit seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t state = master;
  std::uint64_t out = splitmix64(state);
  for (std::uint64_t tag : tags) {
    state ^= out + tag * 0xd1b54a32d192ed03ULL;
    out = splitmix64(state);
  }
  return out;
}

/// Stream tags used across the library.
enum class Stream : std::uint64_t {
  failures = 1,
  durations = 2,
  em_restart = 3,
  probe = 4,
};

/// mt19937_64 with platform-independent uniform/exponential draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t master, std::initializer_list<std::uint64_t> tags)
      : engine_(derive_seed(master, tags)) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1].
  double uniform_open0() noexcept { return 1.0 - uniform(); }
  double exponential(double rate) noexcept { return -std::log(uniform_open0()) / rate; }
  std::uint64_t next() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace stormqueue
