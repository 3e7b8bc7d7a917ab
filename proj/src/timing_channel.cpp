#include "e91/timing_channel.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace e91::timing {

namespace {

constexpr std::uint32_t kU1Mask = kU1Levels - 1;
constexpr unsigned kU2Shift = kU1Bits;
constexpr unsigned kHintShift = kU1Bits + kU2Bits;

std::uint32_t grid_index(double u, std::uint32_t levels, const char* name) {
  if (!(u >= 0.0 && u < 1.0)) {
    throw std::invalid_argument(std::string(name) + " must lie in [0,1)");
  }
  const double scaled = u * levels;
  const auto k = static_cast<std::uint32_t>(scaled);
  if (static_cast<double>(k) != scaled) {
    throw std::invalid_argument(std::string(name) + " is not on the quantization grid");
  }
  return k;
}

double quantize(double u, std::uint32_t levels) {
  if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("value must lie in [0,1)");
  return std::floor(u * levels) / levels;
}

}  // namespace

double quantize_u1(double u) { return quantize(u, kU1Levels); }
double quantize_u2(double u) { return quantize(u, kU2Levels); }

std::uint32_t encode_lambda(const HiddenVariable& lambda) {
  std::uint32_t offset = grid_index(lambda.u1, kU1Levels, "u1");
  offset |= grid_index(lambda.u2, kU2Levels, "u2") << kU2Shift;

  const bool any = lambda.intended_setting_a || lambda.intended_setting_b ||
                   lambda.intended_phase_a || lambda.intended_phase_b;
  const bool all = lambda.intended_setting_a && lambda.intended_setting_b &&
                   lambda.intended_phase_a && lambda.intended_phase_b;
  if (any && !all) throw std::invalid_argument("lambda hints must be all present or all absent");
  if (!all) return offset;

  const auto sa = *lambda.intended_setting_a;
  const auto sb = *lambda.intended_setting_b;
  if (sa != SettingLabel::A && sa != SettingLabel::APrime) {
    throw std::invalid_argument("intended setting for A must be a or a'");
  }
  if (sb != SettingLabel::B && sb != SettingLabel::BPrime) {
    throw std::invalid_argument("intended setting for B must be b or b'");
  }
  std::uint32_t hints = 1;
  hints |= (sa == SettingLabel::APrime ? 1u : 0u) << 1;
  hints |= (sb == SettingLabel::BPrime ? 1u : 0u) << 2;
  hints |= (*lambda.intended_phase_a == Phase::Checking ? 1u : 0u) << 3;
  hints |= (*lambda.intended_phase_b == Phase::Checking ? 1u : 0u) << 4;
  return offset | (hints << kHintShift);
}

HiddenVariable decode_lambda(std::uint32_t offset) {
  if (offset >= kOffsetLimit) {
    throw std::invalid_argument("timing offset " + std::to_string(offset) +
                                " exceeds the 20-bit lambda budget");
  }
  HiddenVariable lambda;
  lambda.u1 = static_cast<double>(offset & kU1Mask) / kU1Levels;
  lambda.u2 = static_cast<double>((offset >> kU2Shift) & 1u) / kU2Levels;
  const std::uint32_t hints = offset >> kHintShift;
  if ((hints & 1u) == 0) {
    if (hints != 0) throw std::invalid_argument("hint bits set without presence flag");
    return lambda;
  }
  lambda.intended_setting_a = (hints >> 1) & 1u ? SettingLabel::APrime : SettingLabel::A;
  lambda.intended_setting_b = (hints >> 2) & 1u ? SettingLabel::BPrime : SettingLabel::B;
  lambda.intended_phase_a = (hints >> 3) & 1u ? Phase::Checking : Phase::Normal;
  lambda.intended_phase_b = (hints >> 4) & 1u ? Phase::Checking : Phase::Normal;
  return lambda;
}

TimingPulse make_pulse(std::uint64_t round_index, const HiddenVariable& lambda) {
  return {round_index, static_cast<std::int64_t>(round_index) * kPulsePeriodNs,
          encode_lambda(lambda)};
}

void write_log(std::ostream& out, const std::vector<TimingPulse>& pulses) {
  out << "# e91-timing v1\n";
  for (const auto& p : pulses) {
    out << p.round_index << ' ' << p.nominal_time_ns << ' ' << p.offset_ns << '\n';
  }
}

std::vector<TimingPulse> read_log(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "# e91-timing v1") {
    throw std::invalid_argument("missing timing log header");
  }
  std::vector<TimingPulse> pulses;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    TimingPulse p;
    if (!(fields >> p.round_index >> p.nominal_time_ns >> p.offset_ns)) {
      throw std::invalid_argument("malformed timing log line: " + line);
    }
    pulses.push_back(p);
  }
  return pulses;
}

}  // namespace e91::timing
