#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "e91/protocol.hpp"

namespace e91 {

// ---------------------------------------------------------------------------
// Pseudo-random schedules (free-choice devices)

enum class ScheduleAlgorithm : std::uint8_t {
  /// Output i = SplitMix64 output number i for the schedule seed.
  SplitMix64 = 1,
};

struct ScheduleChoice {
  bool checking = false;  // bit 63 of the raw output
  bool primed = false;    // bit 62 of the raw output

  friend bool operator==(const ScheduleChoice&, const ScheduleChoice&) = default;
};

struct PseudoRandomSchedule {
  ScheduleAlgorithm algorithm_id = ScheduleAlgorithm::SplitMix64;
  std::uint64_t seed = 0;

  std::uint64_t raw(std::uint64_t round_index) const;

  friend bool operator==(const PseudoRandomSchedule&, const PseudoRandomSchedule&) = default;
};

ScheduleChoice prng_schedule_next(const PseudoRandomSchedule& schedule, std::uint64_t round_index);

/// Maps a schedule choice onto one party's settings from the quadruple.
BasisChoice schedule_basis_choice(const ScheduleChoice& choice, Party party,
                                  const CheckingAngles& angles);

// ---------------------------------------------------------------------------
// Local response rules. Each takes only lambda and the device's own setting
// (plus, for free-choice, the peer setting predicted from its schedule).

/// Outcomes the detection-loophole source pre-draws: a sample of the singlet
/// table at the intended settings, using u1. Requires hints in lambda.
std::pair<Outcome, Outcome> detection_loophole_predrawn(const HiddenVariable& lambda,
                                                        const CheckingAngles& angles);

/// z: Alice gives +1 iff u2 >= 1/2, Bob the opposite. Intended setting: the
/// pre-drawn outcome. Other checking setting: NoDetection. Anything else
/// throws std::invalid_argument.
Outcome detection_loophole_device_measure(const HiddenVariable& lambda,
                                          const MeasurementSetting& own_setting, Party role,
                                          const CheckingAngles& angles);

/// Samples the singlet table at (setting_A, setting_B) with u1 and returns
/// the caller's component. Both devices reach the same joint sample.
Outcome free_choice_device_measure(const HiddenVariable& lambda,
                                   const MeasurementSetting& own_setting,
                                   const MeasurementSetting& predicted_peer_setting, Party role);

// ---------------------------------------------------------------------------
// Sources

class HonestSource final : public Source {
 public:
  Scenario scenario() const override { return Scenario::Honest; }
  Emission emit(std::uint64_t round_index, RoundStream& stream) const override;
};

/// |0>|1> with tag 01 when u < 1/2, else |1>|0> with tag 10; Eve logs the tag.
Emission separable_emission(std::uint64_t round_index, double u);

class SeparableSource final : public Source {
 public:
  Scenario scenario() const override { return Scenario::SeparableEve; }
  Emission emit(std::uint64_t round_index, RoundStream& stream) const override;
};

/// Draws intended settings and quantized (u1, u2) and ships them as a pulse.
class DetectionLoopholeSource final : public Source {
 public:
  Scenario scenario() const override { return Scenario::DetectionLoophole; }
  Emission emit(std::uint64_t round_index, RoundStream& stream) const override;
};

/// Ships quantized (u1, u2). Eve holds both device schedules, so she logs the
/// predicted settings and, for predicted key rounds, Alice's bit.
class FreeChoiceSource final : public Source {
 public:
  FreeChoiceSource(const CheckingAngles& angles, PseudoRandomSchedule schedule_a,
                   PseudoRandomSchedule schedule_b);
  Scenario scenario() const override { return Scenario::FreeChoice; }
  Emission emit(std::uint64_t round_index, RoundStream& stream) const override;

 private:
  CheckingAngles angles_;
  PseudoRandomSchedule schedule_a_;
  PseudoRandomSchedule schedule_b_;
};

// ---------------------------------------------------------------------------
// Devices

/// Measures the qubit it is given; choices are truly random.
class HonestDevice final : public Device {
 public:
  using Device::Device;
  bool supports(Scenario s) const override {
    return s == Scenario::Honest || s == Scenario::SeparableEve;
  }
};

class DetectionLoopholeDevice final : public Device {
 public:
  DetectionLoopholeDevice(Party party, const CheckingAngles& angles)
      : Device(party, angles), angles_(angles) {}
  bool supports(Scenario s) const override { return s == Scenario::DetectionLoophole; }
  bool reads_timing_channel() const override { return true; }
  Outcome respond(const HiddenVariable& lambda, std::uint64_t round_index,
                  const BasisChoice& own) const override;

 private:
  CheckingAngles angles_;
};

/// Choices come from a pre-installed schedule; the device also carries the
/// generator of its peer's schedule.
class FreeChoiceDevice final : public Device {
 public:
  FreeChoiceDevice(Party party, const CheckingAngles& angles, PseudoRandomSchedule own,
                   PseudoRandomSchedule peer)
      : Device(party, angles), angles_(angles), own_(own), peer_(peer) {}
  bool supports(Scenario s) const override { return s == Scenario::FreeChoice; }
  BasisChoice choose(std::uint64_t round_index, RoundStream& phase_stream,
                     RoundStream& setting_stream) const override;
  bool reads_timing_channel() const override { return true; }
  Outcome respond(const HiddenVariable& lambda, std::uint64_t round_index,
                  const BasisChoice& own) const override;

  BasisChoice predict_peer(std::uint64_t round_index) const;

 private:
  CheckingAngles angles_;
  PseudoRandomSchedule own_;
  PseudoRandomSchedule peer_;
};

// ---------------------------------------------------------------------------
// Scenario wiring and Eve's reconstruction

/// Everything Eve knows beyond her per-round log.
struct EveKnowledge {
  Scenario scenario = Scenario::Honest;
  CheckingAngles angles{};
  std::optional<std::pair<PseudoRandomSchedule, PseudoRandomSchedule>> schedules;
};

struct ScenarioSetup {
  std::unique_ptr<Source> source;
  std::unique_ptr<Device> device_a;
  std::unique_ptr<Device> device_b;
  EveKnowledge eve;
};

/// Builds the source and devices for config.scenario. Free-choice schedule
/// seeds are derived from master_seed.
ScenarioSetup make_scenario(const ProtocolConfig& config);

/// Eve's guess of Alice's key bits for the publicly announced key rounds, in
/// announcement order. Throws std::logic_error for the Honest scenario and
/// std::invalid_argument if an announced round is missing from the log.
std::vector<std::uint8_t> eve_reconstruct_key(const EveKnowledge& knowledge,
                                              std::span<const EveRecord> eve_log,
                                              std::span<const std::uint64_t> announced_rounds);

}  // namespace e91
