#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "e91/types.hpp"

namespace e91::timing {

// Offset layout (20 bits, LSB first):
//   [0, 14)  u1 quantized to k / 2^14
//   14       u2 quantized to {0, 1/2}
//   15       hints present
//   16       intended setting a'   (0 = a)
//   17       intended setting b'   (0 = b)
//   18       intended phase A is Checking
//   19       intended phase B is Checking
// Bits 16..19 must be zero when bit 15 is clear.
inline constexpr unsigned kOffsetBits = 20;
inline constexpr std::uint32_t kOffsetLimit = 1u << kOffsetBits;
inline constexpr unsigned kU1Bits = 14;
inline constexpr std::uint32_t kU1Levels = 1u << kU1Bits;
inline constexpr unsigned kU2Bits = 1;
inline constexpr std::uint32_t kU2Levels = 1u << kU2Bits;
/// Pulses are spaced wider than the largest offset so arrival order is kept.
inline constexpr std::int64_t kPulsePeriodNs = std::int64_t{1} << 21;

/// Largest representable value not above u (u in [0,1)).
double quantize_u1(double u);
double quantize_u2(double u);

/// Throws std::invalid_argument if u1/u2 are off the quantization grid or the
/// hint fields are inconsistent (partially present, or wrong labels).
std::uint32_t encode_lambda(const HiddenVariable& lambda);

/// Throws std::invalid_argument for offsets >= 2^20 or non-canonical hint bits.
HiddenVariable decode_lambda(std::uint32_t offset);

TimingPulse make_pulse(std::uint64_t round_index, const HiddenVariable& lambda);

/// Text log, one pulse per line: "<round_index> <nominal_time_ns> <offset_ns>",
/// preceded by a single "# e91-timing v1" header line.
void write_log(std::ostream& out, const std::vector<TimingPulse>& pulses);
std::vector<TimingPulse> read_log(std::istream& in);

}  // namespace e91::timing
