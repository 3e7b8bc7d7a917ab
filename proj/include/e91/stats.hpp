#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "e91/types.hpp"

namespace e91 {

struct CorrelationEstimate {
  std::pair<SettingLabel, SettingLabel> setting_pair{SettingLabel::A, SettingLabel::B};
  std::uint64_t n_pp = 0;
  std::uint64_t n_pm = 0;
  std::uint64_t n_mp = 0;
  std::uint64_t n_mm = 0;
  std::uint64_t n_nondetect = 0;
  double e_hat = 0.0;
  double std_error = 0.0;

  std::uint64_t coincidences() const { return n_pp + n_pm + n_mp + n_mm; }
  std::uint64_t total() const { return coincidences() + n_nondetect; }
};

inline constexpr double kViolationSigmas = 3.0;

struct ChshResult {
  /// Ordered (a,b), (a,b'), (a',b), (a',b').
  std::array<CorrelationEstimate, 4> terms{};
  double s_hat = 0.0;
  double std_error = 0.0;
  Counting counting = Counting::CoincidencesOnly;
  /// |s_hat| > 2 + 3 stderr.
  bool violates = false;
};

/// Estimator from raw counts. Throws std::domain_error if the denominator
/// selected by `counting` is zero.
CorrelationEstimate estimate_correlation_from_counts(std::pair<SettingLabel, SettingLabel> pair,
                                                     std::uint64_t n_pp, std::uint64_t n_pm,
                                                     std::uint64_t n_mp, std::uint64_t n_mm,
                                                     std::uint64_t n_nondetect,
                                                     Counting counting);

/// Throws std::invalid_argument if the records do not share one setting
/// pair, std::domain_error on a zero denominator.
CorrelationEstimate estimate_correlation(std::span<const RoundRecord> records, Counting counting);

/// Combines four term estimates with the + + + - sign pattern.
ChshResult combine_chsh(const std::array<CorrelationEstimate, 4>& terms, Counting counting);

/// Throws std::invalid_argument for settings outside the quadruple and
/// std::domain_error naming the setting pair when a group is empty.
ChshResult chsh_estimate(std::span<const RoundRecord> checking, const CheckingAngles& angles,
                         Counting counting);

/// Fraction of disagreeing positions. Throws std::domain_error for an empty
/// key.
double qber(const SiftedKey& key);

struct MutualInformation {
  double bits = 0.0;
  /// One of the two strings is constant, so the estimate carries no signal.
  bool degenerate = false;
};

/// Plug-in estimate from the empirical joint distribution, in bits. Has the
/// usual O(1/N) upward bias; no correction is applied. Throws
/// std::invalid_argument for empty or unequal-length inputs.
MutualInformation eve_mutual_information(std::span<const std::uint8_t> eve_bits,
                                         std::span<const std::uint8_t> key_bits);

}  // namespace e91
