#include "e91/types.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace e91 {

std::string_view to_string(Phase p) { return p == Phase::Normal ? "N" : "C"; }

std::string_view to_string(SiftStatus s) {
  switch (s) {
    case SiftStatus::Discarded: return "discarded";
    case SiftStatus::NormalPhase: return "normal";
    case SiftStatus::CheckingPhase: return "checking";
  }
  return "?";
}

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::Honest: return "honest";
    case Scenario::SeparableEve: return "separable-eve";
    case Scenario::DetectionLoophole: return "detection-loophole";
    case Scenario::FreeChoice: return "free-choice";
  }
  return "?";
}

std::string_view to_string(Counting c) {
  return c == Counting::CoincidencesOnly ? "coincidences_only" : "all_events";
}

Phase phase_from_string(std::string_view text) {
  if (text == "N") return Phase::Normal;
  if (text == "C") return Phase::Checking;
  throw std::invalid_argument("unknown phase '" + std::string(text) + "'");
}

SiftStatus sift_status_from_string(std::string_view text) {
  for (auto s : {SiftStatus::Discarded, SiftStatus::NormalPhase, SiftStatus::CheckingPhase}) {
    if (to_string(s) == text) return s;
  }
  throw std::invalid_argument("unknown sift status '" + std::string(text) + "'");
}

Scenario scenario_from_string(std::string_view text) {
  for (auto s : {Scenario::Honest, Scenario::SeparableEve, Scenario::DetectionLoophole,
                 Scenario::FreeChoice}) {
    if (to_string(s) == text) return s;
  }
  throw std::invalid_argument("unknown scenario '" + std::string(text) + "'");
}

CheckingAngles CheckingAngles::from_radians(double a, double a_prime, double b, double b_prime) {
  CheckingAngles q{{a, SettingLabel::A},
                   {a_prime, SettingLabel::APrime},
                   {b, SettingLabel::B},
                   {b_prime, SettingLabel::BPrime}};
  q.validate();
  return q;
}

void CheckingAngles::validate() const {
  if (a.label() != SettingLabel::A || a_prime.label() != SettingLabel::APrime ||
      b.label() != SettingLabel::B || b_prime.label() != SettingLabel::BPrime) {
    throw std::invalid_argument("checking settings carry the wrong labels");
  }
  const std::array<double, 4> angles{a.angle(), a_prime.angle(), b.angle(), b_prime.angle()};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) {
      if (angles[i] == angles[j]) {
        throw std::invalid_argument("checking angles must be pairwise distinct");
      }
    }
  }
}

bool CheckingAngles::contains(const MeasurementSetting& s) const {
  return s == a || s == a_prime || s == b || s == b_prime;
}

void ProtocolConfig::validate() const {
  if (n_rounds < 1) throw std::invalid_argument("n_rounds must be at least 1");
  checking_angles.validate();
}

}  // namespace e91
