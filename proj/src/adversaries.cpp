#include "e91/adversaries.hpp"

#include <stdexcept>
#include <string>

#include "e91/rng.hpp"
#include "e91/timing_channel.hpp"

namespace e91 {

namespace {

int alice_bit(Outcome o) { return o == Outcome::Plus ? 1 : 0; }

HiddenVariable draw_shared_randomness(RoundStream& stream) {
  HiddenVariable lambda;
  lambda.u1 = static_cast<double>(stream.bits(timing::kU1Bits)) / timing::kU1Levels;
  lambda.u2 = static_cast<double>(stream.bits(timing::kU2Bits)) / timing::kU2Levels;
  return lambda;
}

Outcome z_outcome_from_u2(const HiddenVariable& lambda, Party role) {
  const Outcome alice = lambda.u2 >= 0.5 ? Outcome::Plus : Outcome::Minus;
  return role == Party::Alice ? alice : opposite(alice);
}

const EveRecord& record_for(std::span<const EveRecord> log, std::uint64_t round) {
  if (round >= log.size() || log[round].round_index != round) {
    throw std::invalid_argument("eve log has no record for round " + std::to_string(round));
  }
  return log[round];
}

}  // namespace

std::uint64_t PseudoRandomSchedule::raw(std::uint64_t round_index) const {
  switch (algorithm_id) {
    case ScheduleAlgorithm::SplitMix64: return splitmix64_at(seed, round_index);
  }
  throw std::invalid_argument("unknown schedule algorithm");
}

ScheduleChoice prng_schedule_next(const PseudoRandomSchedule& schedule, std::uint64_t round_index) {
  const std::uint64_t x = schedule.raw(round_index);
  return {(x >> 63) != 0, ((x >> 62) & 1) != 0};
}

BasisChoice schedule_basis_choice(const ScheduleChoice& choice, Party party,
                                  const CheckingAngles& angles) {
  if (!choice.checking) return {Phase::Normal, MeasurementSetting::z()};
  const auto [unprimed, primed] = angles.pair_for(party);
  return {Phase::Checking, choice.primed ? primed : unprimed};
}

std::pair<Outcome, Outcome> detection_loophole_predrawn(const HiddenVariable& lambda,
                                                        const CheckingAngles& angles) {
  if (!lambda.has_hints() || !lambda.intended_setting_b) {
    throw std::invalid_argument("lambda carries no intended settings");
  }
  const auto& sa = *lambda.intended_setting_a == SettingLabel::APrime ? angles.a_prime : angles.a;
  const auto& sb = *lambda.intended_setting_b == SettingLabel::BPrime ? angles.b_prime : angles.b;
  return sample_outcomes(joint_probabilities(singlet(), sa, sb), lambda.u1);
}

Outcome detection_loophole_device_measure(const HiddenVariable& lambda,
                                          const MeasurementSetting& own_setting, Party role,
                                          const CheckingAngles& angles) {
  if (own_setting == MeasurementSetting::z()) return z_outcome_from_u2(lambda, role);
  const auto [unprimed, primed] = angles.pair_for(role);
  if (own_setting != unprimed && own_setting != primed) {
    throw std::invalid_argument("setting '" + std::string(to_string(own_setting.label())) +
                                "' is not available to this device");
  }
  const auto predrawn = detection_loophole_predrawn(lambda, angles);
  const auto intended =
      role == Party::Alice ? *lambda.intended_setting_a : *lambda.intended_setting_b;
  if (own_setting.label() != intended) return Outcome::NoDetection;
  return role == Party::Alice ? predrawn.first : predrawn.second;
}

Outcome free_choice_device_measure(const HiddenVariable& lambda,
                                   const MeasurementSetting& own_setting,
                                   const MeasurementSetting& predicted_peer_setting, Party role) {
  const bool alice = role == Party::Alice;
  const auto table = joint_probabilities(singlet(), alice ? own_setting : predicted_peer_setting,
                                         alice ? predicted_peer_setting : own_setting);
  const auto pair = sample_outcomes(table, lambda.u1);
  return alice ? pair.first : pair.second;
}

Emission HonestSource::emit(std::uint64_t round_index, RoundStream&) const {
  return {round_index, singlet(), std::nullopt};
}

Emission separable_emission(std::uint64_t round_index, double u) {
  const bool zero_one = u < 0.5;
  EveRecord eve;
  eve.round_index = round_index;
  eve.known_state_tag = zero_one ? StateTag::ZeroOne : StateTag::OneZero;
  // |0>|1> gives Alice +1 in z, i.e. key bit 1.
  eve.inferred_key_bit = zero_one ? 1 : 0;
  return {round_index, zero_one ? TwoQubitState::basis(0, 1) : TwoQubitState::basis(1, 0), eve};
}

Emission SeparableSource::emit(std::uint64_t round_index, RoundStream& stream) const {
  return separable_emission(round_index, stream.uniform());
}

Emission DetectionLoopholeSource::emit(std::uint64_t round_index, RoundStream& stream) const {
  HiddenVariable lambda = draw_shared_randomness(stream);
  lambda.intended_setting_a = stream.coin() ? SettingLabel::APrime : SettingLabel::A;
  lambda.intended_setting_b = stream.coin() ? SettingLabel::BPrime : SettingLabel::B;
  lambda.intended_phase_a = Phase::Checking;
  lambda.intended_phase_b = Phase::Checking;

  EveRecord eve;
  eve.round_index = round_index;
  eve.known_lambda = lambda;
  eve.inferred_key_bit = alice_bit(z_outcome_from_u2(lambda, Party::Alice));
  return {round_index, timing::make_pulse(round_index, lambda), eve};
}

FreeChoiceSource::FreeChoiceSource(const CheckingAngles& angles, PseudoRandomSchedule schedule_a,
                                   PseudoRandomSchedule schedule_b)
    : angles_(angles), schedule_a_(schedule_a), schedule_b_(schedule_b) {}

Emission FreeChoiceSource::emit(std::uint64_t round_index, RoundStream& stream) const {
  const HiddenVariable lambda = draw_shared_randomness(stream);
  const auto choice_a =
      schedule_basis_choice(prng_schedule_next(schedule_a_, round_index), Party::Alice, angles_);
  const auto choice_b =
      schedule_basis_choice(prng_schedule_next(schedule_b_, round_index), Party::Bob, angles_);

  EveRecord eve;
  eve.round_index = round_index;
  eve.known_lambda = lambda;
  eve.predicted_settings = std::pair{choice_a, choice_b};
  if (choice_a.phase == Phase::Normal && choice_b.phase == Phase::Normal) {
    eve.inferred_key_bit = alice_bit(
        free_choice_device_measure(lambda, choice_a.setting, choice_b.setting, Party::Alice));
  }
  return {round_index, timing::make_pulse(round_index, lambda), eve};
}

Outcome DetectionLoopholeDevice::respond(const HiddenVariable& lambda, std::uint64_t,
                                         const BasisChoice& own) const {
  return detection_loophole_device_measure(lambda, own.setting, party(), angles_);
}

BasisChoice FreeChoiceDevice::choose(std::uint64_t round_index, RoundStream&, RoundStream&) const {
  return schedule_basis_choice(prng_schedule_next(own_, round_index), party(), angles_);
}

BasisChoice FreeChoiceDevice::predict_peer(std::uint64_t round_index) const {
  const Party peer = party() == Party::Alice ? Party::Bob : Party::Alice;
  return schedule_basis_choice(prng_schedule_next(peer_, round_index), peer, angles_);
}

Outcome FreeChoiceDevice::respond(const HiddenVariable& lambda, std::uint64_t round_index,
                                  const BasisChoice& own) const {
  return free_choice_device_measure(lambda, own.setting, predict_peer(round_index).setting,
                                    party());
}

ScenarioSetup make_scenario(const ProtocolConfig& config) {
  config.validate();
  const auto& angles = config.checking_angles;
  ScenarioSetup setup;
  setup.eve.scenario = config.scenario;
  setup.eve.angles = angles;
  switch (config.scenario) {
    case Scenario::Honest:
      setup.source = std::make_unique<HonestSource>();
      setup.device_a = std::make_unique<HonestDevice>(Party::Alice, angles);
      setup.device_b = std::make_unique<HonestDevice>(Party::Bob, angles);
      break;
    case Scenario::SeparableEve:
      setup.source = std::make_unique<SeparableSource>();
      setup.device_a = std::make_unique<HonestDevice>(Party::Alice, angles);
      setup.device_b = std::make_unique<HonestDevice>(Party::Bob, angles);
      break;
    case Scenario::DetectionLoophole:
      setup.source = std::make_unique<DetectionLoopholeSource>();
      setup.device_a = std::make_unique<DetectionLoopholeDevice>(Party::Alice, angles);
      setup.device_b = std::make_unique<DetectionLoopholeDevice>(Party::Bob, angles);
      break;
    case Scenario::FreeChoice: {
      const PseudoRandomSchedule sa{ScheduleAlgorithm::SplitMix64,
                                    RoundStream(config.master_seed, StreamRole::ScheduleSeedA, 0)
                                        .next_u64()};
      const PseudoRandomSchedule sb{ScheduleAlgorithm::SplitMix64,
                                    RoundStream(config.master_seed, StreamRole::ScheduleSeedB, 0)
                                        .next_u64()};
      setup.source = std::make_unique<FreeChoiceSource>(angles, sa, sb);
      setup.device_a = std::make_unique<FreeChoiceDevice>(Party::Alice, angles, sa, sb);
      setup.device_b = std::make_unique<FreeChoiceDevice>(Party::Bob, angles, sb, sa);
      setup.eve.schedules = std::pair{sa, sb};
      break;
    }
  }
  return setup;
}

std::vector<std::uint8_t> eve_reconstruct_key(const EveKnowledge& knowledge,
                                              std::span<const EveRecord> eve_log,
                                              std::span<const std::uint64_t> announced_rounds) {
  std::vector<std::uint8_t> bits;
  bits.reserve(announced_rounds.size());
  switch (knowledge.scenario) {
    case Scenario::Honest:
      throw std::logic_error("no eavesdropper channel exists in the honest scenario");

    case Scenario::SeparableEve:
      for (auto round : announced_rounds) {
        const auto& rec = record_for(eve_log, round);
        if (!rec.known_state_tag) throw std::invalid_argument("eve record lacks a state tag");
        bits.push_back(*rec.known_state_tag == StateTag::ZeroOne ? 1 : 0);
      }
      return bits;

    case Scenario::DetectionLoophole:
      for (auto round : announced_rounds) {
        const auto& rec = record_for(eve_log, round);
        if (!rec.known_lambda) throw std::invalid_argument("eve record lacks lambda");
        bits.push_back(alice_bit(z_outcome_from_u2(*rec.known_lambda, Party::Alice)));
      }
      return bits;

    case Scenario::FreeChoice: {
      if (!knowledge.schedules) throw std::invalid_argument("eve needs both device schedules");
      const auto& [sa, sb] = *knowledge.schedules;
      for (auto round : announced_rounds) {
        const auto& rec = record_for(eve_log, round);
        if (!rec.known_lambda) throw std::invalid_argument("eve record lacks lambda");
        // Replay both devices exactly as they ran.
        const auto choice_a =
            schedule_basis_choice(prng_schedule_next(sa, round), Party::Alice, knowledge.angles);
        const auto choice_b =
            schedule_basis_choice(prng_schedule_next(sb, round), Party::Bob, knowledge.angles);
        bits.push_back(alice_bit(free_choice_device_measure(*rec.known_lambda, choice_a.setting,
                                                            choice_b.setting, Party::Alice)));
      }
      return bits;
    }
  }
  throw std::logic_error("unhandled scenario");
}

}  // namespace e91
