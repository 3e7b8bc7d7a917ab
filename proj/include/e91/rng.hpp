#pragma once

#include <cstdint>

namespace e91 {

// SplitMix64 (Steele, Lea, Flood; reference code by S. Vigna). Used both as the
// per-round stream generator and as the free-choice schedule generator because
// its n-th output is a closed-form function of (seed, n).
inline constexpr std::uint64_t kSplitMixGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Output number `index` (0-based) of a SplitMix64 generator seeded with `seed`.
constexpr std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t index) {
  return splitmix64_mix(seed + (index + 1) * kSplitMixGamma);
}

/// Top 53 bits mapped onto [0,1).
constexpr double to_unit_interval(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

/// Who consumes a derived stream. Values are part of the reproducibility
/// contract; never renumber.
enum class StreamRole : std::uint64_t {
  Source = 1,
  PhaseA = 2,
  SettingA = 3,
  PhaseB = 4,
  SettingB = 5,
  Measurement = 6,
  ScheduleSeedA = 7,
  ScheduleSeedB = 8,
};

/// Deterministic stream keyed by (master_seed, role, round_index):
/// initial state = mix(mix(mix(master_seed) ^ role) ^ round_index), then
/// plain SplitMix64 stepping.
class RoundStream {
 public:
  RoundStream(std::uint64_t master_seed, StreamRole role, std::uint64_t round_index)
      : state_(splitmix64_mix(splitmix64_mix(splitmix64_mix(master_seed) ^
                                             static_cast<std::uint64_t>(role)) ^
                              round_index)) {}

  std::uint64_t next_u64() {
    state_ += kSplitMixGamma;
    return splitmix64_mix(state_);
  }
  double uniform() { return to_unit_interval(next_u64()); }
  bool coin() { return (next_u64() >> 63) != 0; }
  /// Uniform integer in [0, 2^bits), bits in [1, 64].
  std::uint64_t bits(unsigned n) { return n >= 64 ? next_u64() : next_u64() >> (64 - n); }

 private:
  std::uint64_t state_;
};

}  // namespace e91
