#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "e91/quantum_core.hpp"

namespace e91 {

enum class Party : std::uint8_t { Alice, Bob };
enum class Phase : std::uint8_t { Normal, Checking };
enum class SiftStatus : std::uint8_t { Discarded, NormalPhase, CheckingPhase };
enum class Scenario : std::uint8_t { Honest, SeparableEve, DetectionLoophole, FreeChoice };
enum class Counting : std::uint8_t { CoincidencesOnly, AllEvents };

std::string_view to_string(Phase p);
std::string_view to_string(SiftStatus s);
std::string_view to_string(Scenario s);
std::string_view to_string(Counting c);
Phase phase_from_string(std::string_view text);
SiftStatus sift_status_from_string(std::string_view text);
/// Accepts the CLI spellings: honest, separable-eve, detection-loophole, free-choice.
Scenario scenario_from_string(std::string_view text);

/// The four Bell-test directions a, a', b, b'.
struct CheckingAngles {
  MeasurementSetting a{0.0, SettingLabel::A};
  MeasurementSetting a_prime{kPi / 2, SettingLabel::APrime};
  MeasurementSetting b{kPi / 4, SettingLabel::B};
  MeasurementSetting b_prime{7 * kPi / 4, SettingLabel::BPrime};

  /// Throws std::invalid_argument unless the four angles are pairwise distinct.
  static CheckingAngles from_radians(double a, double a_prime, double b, double b_prime);
  void validate() const;

  std::pair<MeasurementSetting, MeasurementSetting> pair_for(Party p) const {
    return p == Party::Alice ? std::pair{a, a_prime} : std::pair{b, b_prime};
  }
  /// Settings of the configured quadruple, matched by label and angle.
  bool contains(const MeasurementSetting& s) const;
};

struct ProtocolConfig {
  std::uint64_t n_rounds = 1;
  CheckingAngles checking_angles{};
  std::uint64_t master_seed = 0;
  Scenario scenario = Scenario::Honest;

  void validate() const;
};

struct BasisChoice {
  Phase phase = Phase::Normal;
  MeasurementSetting setting = MeasurementSetting::z();

  friend bool operator==(const BasisChoice&, const BasisChoice&) = default;
};

/// Per-round hidden variable carried over the timing side channel.
struct HiddenVariable {
  double u1 = 0.0;
  double u2 = 0.0;
  std::optional<SettingLabel> intended_setting_a;
  std::optional<SettingLabel> intended_setting_b;
  std::optional<Phase> intended_phase_a;
  std::optional<Phase> intended_phase_b;

  bool has_hints() const { return intended_setting_a.has_value(); }
  friend bool operator==(const HiddenVariable&, const HiddenVariable&) = default;
};

struct TimingPulse {
  std::uint64_t round_index = 0;
  std::int64_t nominal_time_ns = 0;
  std::uint32_t offset_ns = 0;

  friend bool operator==(const TimingPulse&, const TimingPulse&) = default;
};

enum class StateTag : std::uint8_t { ZeroOne, OneZero };

/// What the eavesdropper knows about one round.
struct EveRecord {
  std::uint64_t round_index = 0;
  std::optional<StateTag> known_state_tag;
  std::optional<HiddenVariable> known_lambda;
  std::optional<std::pair<BasisChoice, BasisChoice>> predicted_settings;
  std::optional<int> inferred_key_bit;

  friend bool operator==(const EveRecord&, const EveRecord&) = default;
};

/// What a source sends for one round: a quantum state for Honest and
/// SeparableEve sources, or a timing pulse carrying lambda.
struct Emission {
  std::uint64_t round_index = 0;
  std::variant<TwoQubitState, TimingPulse> payload;
  std::optional<EveRecord> eve;
};

struct RoundRecord {
  std::uint64_t round_index = 0;
  Phase phase_a = Phase::Normal;
  Phase phase_b = Phase::Normal;
  MeasurementSetting setting_a = MeasurementSetting::z();
  MeasurementSetting setting_b = MeasurementSetting::z();
  Outcome outcome_a = Outcome::Plus;
  Outcome outcome_b = Outcome::Minus;
  /// Timing offset of the pulse that carried lambda, when one was used.
  std::optional<std::uint32_t> lambda_ref;
  SiftStatus sift_status = SiftStatus::NormalPhase;

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

struct Transcript {
  ProtocolConfig config;
  std::vector<RoundRecord> rounds;
  std::vector<EveRecord> eve_log;
  std::vector<TimingPulse> timing_log;
};

struct SiftedKey {
  std::vector<std::uint8_t> bits_a;
  std::vector<std::uint8_t> bits_b;
  std::vector<std::uint64_t> source_rounds;
  /// Normal-phase rounds dropped because a device reported no detection.
  std::vector<std::uint64_t> undetected_rounds;

  std::size_t size() const { return bits_a.size(); }
};

}  // namespace e91
