#include "e91/quantum_core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace e91 {

namespace {

// Real eigenvector of cos(t) Z + sin(t) X for eigenvalue `sign`.
std::array<double, 2> spin_eigenvector(double angle, int sign) {
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  if (sign > 0) return {c, s};
  return {-s, c};
}

double outcome_probability(const TwoQubitState& state, double angle_a, int sign_a,
                           double angle_b, int sign_b) {
  const auto ea = spin_eigenvector(angle_a, sign_a);
  const auto eb = spin_eigenvector(angle_b, sign_b);
  Complex amp{0.0, 0.0};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      amp += ea[i] * eb[j] * state[2 * i + j];
    }
  }
  return std::norm(amp);
}

}  // namespace

TwoQubitState TwoQubitState::from_amplitudes(const std::array<Complex, 4>& amplitudes) {
  TwoQubitState state(amplitudes);
  const double n2 = state.norm_squared();
  if (!std::isfinite(n2) || std::abs(n2 - 1.0) > kNormTolerance) {
    throw std::invalid_argument("two-qubit state is not normalized (norm^2 = " +
                                std::to_string(n2) + ")");
  }
  return state;
}

TwoQubitState TwoQubitState::product(const std::array<Complex, 2>& alice,
                                     const std::array<Complex, 2>& bob) {
  return from_amplitudes({alice[0] * bob[0], alice[0] * bob[1], alice[1] * bob[0],
                          alice[1] * bob[1]});
}

TwoQubitState TwoQubitState::basis(int alice_bit, int bob_bit) {
  if ((alice_bit != 0 && alice_bit != 1) || (bob_bit != 0 && bob_bit != 1)) {
    throw std::invalid_argument("basis bits must be 0 or 1");
  }
  std::array<Complex, 4> a{};
  a[2 * alice_bit + bob_bit] = 1.0;
  return TwoQubitState(a);
}

double TwoQubitState::norm_squared() const {
  double total = 0.0;
  for (const auto& c : amplitudes_) total += std::norm(c);
  return total;
}

TwoQubitState singlet() {
  const double h = 1.0 / std::sqrt(2.0);
  return TwoQubitState::from_amplitudes({0.0, h, -h, 0.0});
}

std::string_view to_string(SettingLabel label) {
  switch (label) {
    case SettingLabel::A: return "a";
    case SettingLabel::APrime: return "a'";
    case SettingLabel::B: return "b";
    case SettingLabel::BPrime: return "b'";
    case SettingLabel::Z: return "z";
    case SettingLabel::Custom: return "custom";
  }
  return "?";
}

SettingLabel setting_label_from_string(std::string_view text) {
  for (auto l : {SettingLabel::A, SettingLabel::APrime, SettingLabel::B, SettingLabel::BPrime,
                 SettingLabel::Z, SettingLabel::Custom}) {
    if (to_string(l) == text) return l;
  }
  throw std::invalid_argument("unknown setting label '" + std::string(text) + "'");
}

MeasurementSetting::MeasurementSetting(double angle, SettingLabel label) : label_(label) {
  if (!std::isfinite(angle)) throw std::invalid_argument("measurement angle must be finite");
  double reduced = std::fmod(angle, 2.0 * kPi);
  if (reduced < 0.0) reduced += 2.0 * kPi;
  if (reduced >= 2.0 * kPi) reduced = 0.0;
  if (label == SettingLabel::Z && reduced != 0.0) {
    throw std::invalid_argument("setting z must have angle 0");
  }
  angle_ = reduced;
}

void ProbabilityTable::validate() const {
  for (double p : {p_pp, p_pm, p_mp, p_mm}) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability outside [0,1]");
  }
  if (std::abs(sum() - 1.0) > kNormTolerance) {
    throw std::invalid_argument("probability table does not sum to 1");
  }
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Plus: return "+1";
    case Outcome::Minus: return "-1";
    case Outcome::NoDetection: return "ND";
  }
  return "?";
}

Outcome outcome_from_string(std::string_view text) {
  if (text == "+1") return Outcome::Plus;
  if (text == "-1") return Outcome::Minus;
  if (text == "ND") return Outcome::NoDetection;
  throw std::invalid_argument("unknown outcome '" + std::string(text) + "'");
}

ProbabilityTable joint_probabilities(const TwoQubitState& state,
                                     const MeasurementSetting& setting_a,
                                     const MeasurementSetting& setting_b) {
  if (std::abs(state.norm_squared() - 1.0) > kNormTolerance) {
    throw std::invalid_argument("joint_probabilities requires a normalized state");
  }
  const double ta = setting_a.angle();
  const double tb = setting_b.angle();
  return {outcome_probability(state, ta, +1, tb, +1), outcome_probability(state, ta, +1, tb, -1),
          outcome_probability(state, ta, -1, tb, +1), outcome_probability(state, ta, -1, tb, -1)};
}

double correlation(const TwoQubitState& state, const MeasurementSetting& setting_a,
                   const MeasurementSetting& setting_b) {
  const auto t = joint_probabilities(state, setting_a, setting_b);
  return t.p_pp + t.p_mm - t.p_pm - t.p_mp;
}

double chsh_value(const TwoQubitState& state, const MeasurementSetting& a,
                  const MeasurementSetting& a_prime, const MeasurementSetting& b,
                  const MeasurementSetting& b_prime) {
  return correlation(state, a, b) + correlation(state, a, b_prime) +
         correlation(state, a_prime, b) - correlation(state, a_prime, b_prime);
}

std::pair<Outcome, Outcome> sample_outcomes(const ProbabilityTable& table, double u) {
  if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("sample_outcomes: u must be in [0,1)");
  static constexpr std::array<std::pair<Outcome, Outcome>, 4> kPairs{{
      {Outcome::Plus, Outcome::Plus},
      {Outcome::Plus, Outcome::Minus},
      {Outcome::Minus, Outcome::Plus},
      {Outcome::Minus, Outcome::Minus},
  }};
  const std::array<double, 4> widths{table.p_pp, table.p_pm, table.p_mp, table.p_mm};
  double upper = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (widths[i] <= 0.0) continue;
    last_nonzero = i;
    upper += widths[i];
    if (u < upper) return kPairs[i];
  }
  // Rounding can leave the cumulative sum a few ulps short of 1.
  return kPairs[last_nonzero];
}

}  // namespace e91
