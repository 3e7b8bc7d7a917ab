#include "e91/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace e91 {

namespace {

std::string pair_name(std::pair<SettingLabel, SettingLabel> p) {
  return "(" + std::string(to_string(p.first)) + "," + std::string(to_string(p.second)) + ")";
}

double entropy_term(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

}  // namespace

CorrelationEstimate estimate_correlation_from_counts(std::pair<SettingLabel, SettingLabel> pair,
                                                     std::uint64_t n_pp, std::uint64_t n_pm,
                                                     std::uint64_t n_mp, std::uint64_t n_mm,
                                                     std::uint64_t n_nondetect,
                                                     Counting counting) {
  CorrelationEstimate est{pair, n_pp, n_pm, n_mp, n_mm, n_nondetect};
  const std::uint64_t denom =
      counting == Counting::CoincidencesOnly ? est.coincidences() : est.total();
  if (denom == 0) {
    throw std::domain_error("no events for setting pair " + pair_name(pair));
  }
  const double numerator = static_cast<double>(n_pp + n_mm) - static_cast<double>(n_pm + n_mp);
  est.e_hat = numerator / static_cast<double>(denom);
  est.std_error = std::sqrt(std::max(0.0, 1.0 - est.e_hat * est.e_hat) / static_cast<double>(denom));
  return est;
}

CorrelationEstimate estimate_correlation(std::span<const RoundRecord> records, Counting counting) {
  if (records.empty()) throw std::domain_error("no records for correlation estimate");
  const auto pair = std::pair{records.front().setting_a.label(), records.front().setting_b.label()};
  std::uint64_t n[4] = {0, 0, 0, 0};
  std::uint64_t nd = 0;
  for (const auto& r : records) {
    if (r.setting_a != records.front().setting_a || r.setting_b != records.front().setting_b) {
      throw std::invalid_argument("records mix setting pairs");
    }
    if (!detected(r.outcome_a) || !detected(r.outcome_b)) {
      ++nd;
      continue;
    }
    const int idx = (r.outcome_a == Outcome::Plus ? 0 : 2) + (r.outcome_b == Outcome::Plus ? 0 : 1);
    ++n[idx];
  }
  return estimate_correlation_from_counts(pair, n[0], n[1], n[2], n[3], nd, counting);
}

ChshResult combine_chsh(const std::array<CorrelationEstimate, 4>& terms, Counting counting) {
  ChshResult r;
  r.terms = terms;
  r.counting = counting;
  r.s_hat = terms[0].e_hat + terms[1].e_hat + terms[2].e_hat - terms[3].e_hat;
  double var = 0.0;
  for (const auto& t : terms) var += t.std_error * t.std_error;
  r.std_error = std::sqrt(var);
  r.violates = std::abs(r.s_hat) > 2.0 + kViolationSigmas * r.std_error;
  return r;
}

ChshResult chsh_estimate(std::span<const RoundRecord> checking, const CheckingAngles& angles,
                         Counting counting) {
  const std::array<std::pair<MeasurementSetting, MeasurementSetting>, 4> order{{
      {angles.a, angles.b},
      {angles.a, angles.b_prime},
      {angles.a_prime, angles.b},
      {angles.a_prime, angles.b_prime},
  }};
  std::array<std::vector<RoundRecord>, 4> groups;
  for (const auto& r : checking) {
    bool placed = false;
    for (std::size_t i = 0; i < 4 && !placed; ++i) {
      if (r.setting_a == order[i].first && r.setting_b == order[i].second) {
        groups[i].push_back(r);
        placed = true;
      }
    }
    if (!placed) {
      throw std::invalid_argument("round " + std::to_string(r.round_index) +
                                  " uses settings outside the checking quadruple");
    }
  }
  std::array<CorrelationEstimate, 4> terms;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto labels = std::pair{order[i].first.label(), order[i].second.label()};
    if (groups[i].empty()) {
      throw std::domain_error("no checking rounds for setting pair " + pair_name(labels));
    }
    terms[i] = estimate_correlation(groups[i], counting);
  }
  return combine_chsh(terms, counting);
}

double qber(const SiftedKey& key) {
  if (key.bits_a.empty()) throw std::domain_error("qber of an empty key");
  if (key.bits_a.size() != key.bits_b.size()) throw std::invalid_argument("key length mismatch");
  std::size_t errors = 0;
  for (std::size_t i = 0; i < key.bits_a.size(); ++i) errors += key.bits_a[i] != key.bits_b[i];
  return static_cast<double>(errors) / static_cast<double>(key.bits_a.size());
}

MutualInformation eve_mutual_information(std::span<const std::uint8_t> eve_bits,
                                         std::span<const std::uint8_t> key_bits) {
  if (eve_bits.size() != key_bits.size()) throw std::invalid_argument("bit string length mismatch");
  if (eve_bits.empty()) throw std::invalid_argument("mutual information of empty strings");
  double joint[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < eve_bits.size(); ++i) joint[eve_bits[i] & 1][key_bits[i] & 1] += 1;
  const double n = static_cast<double>(eve_bits.size());
  double h_eve = 0, h_key = 0, h_joint = 0;
  for (int x = 0; x < 2; ++x) {
    h_eve += entropy_term((joint[x][0] + joint[x][1]) / n);
    h_key += entropy_term((joint[0][x] + joint[1][x]) / n);
    for (int y = 0; y < 2; ++y) h_joint += entropy_term(joint[x][y] / n);
  }
  MutualInformation mi;
  mi.bits = std::max(0.0, h_eve + h_key - h_joint);
  mi.degenerate = h_eve == 0.0 || h_key == 0.0;
  return mi;
}

}  // namespace e91
