#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string_view>
#include <utility>

namespace e91 {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kNormTolerance = 1e-12;

/// Exact pure state of two qubits, amplitudes ordered |00>, |01>, |10>, |11>
/// with Alice's qubit as the left tensor factor.
class TwoQubitState {
 public:
  /// Throws std::invalid_argument if the squared norm differs from 1 by more
  /// than kNormTolerance.
  static TwoQubitState from_amplitudes(const std::array<Complex, 4>& amplitudes);

  /// Tensor product of two normalized single-qubit states (|0>, |1>) amplitudes.
  static TwoQubitState product(const std::array<Complex, 2>& alice,
                               const std::array<Complex, 2>& bob);

  /// Computational basis state |alice_bit>|bob_bit>.
  static TwoQubitState basis(int alice_bit, int bob_bit);

  const std::array<Complex, 4>& amplitudes() const { return amplitudes_; }
  const Complex& operator[](std::size_t i) const { return amplitudes_[i]; }
  double norm_squared() const;

  friend bool operator==(const TwoQubitState&, const TwoQubitState&) = default;

 private:
  explicit TwoQubitState(const std::array<Complex, 4>& a) : amplitudes_(a) {}
  std::array<Complex, 4> amplitudes_;
};

/// (|0>|1> - |1>|0>) / sqrt(2).
TwoQubitState singlet();

enum class SettingLabel : std::uint8_t { A, APrime, B, BPrime, Z, Custom };

std::string_view to_string(SettingLabel label);
SettingLabel setting_label_from_string(std::string_view text);

/// Spin-measurement direction in the z-x plane. The +1 outcome is the +1
/// eigenvector of cos(angle) Z + sin(angle) X, so angle 0 is the {|0>,|1>}
/// basis.
class MeasurementSetting {
 public:
  /// Angle is reduced into [0, 2*pi). Throws std::invalid_argument for a
  /// non-finite angle or a Z label with nonzero angle.
  MeasurementSetting(double angle, SettingLabel label);

  static MeasurementSetting z() { return {0.0, SettingLabel::Z}; }

  double angle() const { return angle_; }
  SettingLabel label() const { return label_; }

  friend bool operator==(const MeasurementSetting&, const MeasurementSetting&) = default;

 private:
  double angle_;
  SettingLabel label_;
};

/// Joint outcome distribution P(s_a, s_b) for s in {+1, -1}.
struct ProbabilityTable {
  double p_pp = 0.0;
  double p_pm = 0.0;
  double p_mp = 0.0;
  double p_mm = 0.0;

  double sum() const { return p_pp + p_pm + p_mp + p_mm; }
  /// Throws std::invalid_argument unless every entry is in [0,1] and the
  /// entries sum to 1 within kNormTolerance.
  void validate() const;

  friend bool operator==(const ProbabilityTable&, const ProbabilityTable&) = default;
};

enum class Outcome : std::int8_t { Minus = -1, NoDetection = 0, Plus = 1 };

inline int value(Outcome o) { return static_cast<int>(o); }
inline bool detected(Outcome o) { return o != Outcome::NoDetection; }
inline Outcome opposite(Outcome o) { return static_cast<Outcome>(-value(o)); }
std::string_view to_string(Outcome o);
Outcome outcome_from_string(std::string_view text);

ProbabilityTable joint_probabilities(const TwoQubitState& state,
                                     const MeasurementSetting& setting_a,
                                     const MeasurementSetting& setting_b);

/// E = P++ + P-- - P+- - P-+.
double correlation(const TwoQubitState& state, const MeasurementSetting& setting_a,
                   const MeasurementSetting& setting_b);

/// Signed E(a,b) + E(a,b') + E(a',b) - E(a',b').
double chsh_value(const TwoQubitState& state, const MeasurementSetting& a,
                  const MeasurementSetting& a_prime, const MeasurementSetting& b,
                  const MeasurementSetting& b_prime);

/// Inverse-CDF draw: [0,1) is cut into consecutive intervals of widths
/// p_pp, p_pm, p_mp, p_mm and the pair owning u is returned.
std::pair<Outcome, Outcome> sample_outcomes(const ProbabilityTable& table, double u);

}  // namespace e91
