#include "e91/protocol.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "e91/adversaries.hpp"
#include "e91/report.hpp"

using namespace e91;

namespace {

ProtocolConfig config_for(Scenario scenario, std::uint64_t rounds, std::uint64_t seed = 2024) {
  ProtocolConfig c;
  c.scenario = scenario;
  c.n_rounds = rounds;
  c.master_seed = seed;
  return c;
}

Transcript run(const ProtocolConfig& c) {
  const auto setup = make_scenario(c);
  return run_protocol(c, *setup.source, *setup.device_a, *setup.device_b);
}

RoundRecord with_phases(std::uint64_t i, Phase a, Phase b) {
  const CheckingAngles q;
  RoundRecord r;
  r.round_index = i;
  r.phase_a = a;
  r.phase_b = b;
  r.setting_a = a == Phase::Normal ? MeasurementSetting::z() : q.a;
  r.setting_b = b == Phase::Normal ? MeasurementSetting::z() : q.b;
  r.sift_status = a != b ? SiftStatus::Discarded
                         : (a == Phase::Normal ? SiftStatus::NormalPhase : SiftStatus::CheckingPhase);
  return r;
}

std::string serialized(const Transcript& t) {
  std::ostringstream s;
  write_transcript(s, t);
  return s.str();
}

// One long honest run shared by the statistical tests below.
const Transcript& honest_100k() {
  static const Transcript t = run(config_for(Scenario::Honest, 100'000));
  return t;
}

}  // namespace

TEST(ProtocolConfig, Validation) {
  auto c = config_for(Scenario::Honest, 0);
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_THROW(CheckingAngles::from_radians(0, 1, 1, 2), std::invalid_argument);
  EXPECT_THROW(CheckingAngles::from_radians(0, 2 * kPi, 1, 2), std::invalid_argument);
  EXPECT_NO_THROW(CheckingAngles::from_radians(0, kPi / 2, kPi / 4, 7 * kPi / 4));
}

TEST(RunProtocol, HonestIsDeterministic) {
  const auto c = config_for(Scenario::Honest, 1000, 7);
  const auto t1 = run(c);
  const auto t2 = run(c);
  EXPECT_EQ(t1.rounds, t2.rounds);
  EXPECT_EQ(serialized(t1), serialized(t2));
  EXPECT_NE(serialized(t1), serialized(run(config_for(Scenario::Honest, 1000, 8))));
}

TEST(RunProtocol, RoundIndicesAreSequential) {
  const auto t = run(config_for(Scenario::FreeChoice, 500));
  ASSERT_EQ(t.rounds.size(), 500u);
  for (std::size_t i = 0; i < t.rounds.size(); ++i) EXPECT_EQ(t.rounds[i].round_index, i);
  EXPECT_EQ(t.eve_log.size(), 500u);
  EXPECT_EQ(t.timing_log.size(), 500u);
}

TEST(RunProtocol, RejectsMismatchedParts) {
  const auto c = config_for(Scenario::Honest, 10);
  const CheckingAngles q;
  const SeparableSource wrong_source;
  const HonestSource source;
  const HonestDevice a(Party::Alice, q), b(Party::Bob, q);
  const DetectionLoopholeDevice dl_a(Party::Alice, q);
  EXPECT_THROW(run_protocol(c, wrong_source, a, b), std::invalid_argument);
  EXPECT_THROW(run_protocol(c, source, dl_a, b), std::invalid_argument);
  EXPECT_THROW(run_protocol(c, source, b, a), std::invalid_argument);
  const HonestDevice shifted(Party::Alice, CheckingAngles::from_radians(0.1, kPi / 2, kPi / 4,
                                                                         7 * kPi / 4));
  EXPECT_THROW(run_protocol(c, source, shifted, b), std::invalid_argument);
  EXPECT_NO_THROW(run_protocol(c, source, a, b));
}

TEST(RunProtocol, HonestPhaseFractions) {
  const auto& t = honest_100k();
  std::size_t discarded = 0, normal = 0;
  for (const auto& r : t.rounds) {
    discarded += r.sift_status == SiftStatus::Discarded;
    normal += r.sift_status == SiftStatus::NormalPhase;
  }
  const double n = static_cast<double>(t.rounds.size());
  EXPECT_NEAR(discarded / n, 0.5, 0.01);
  EXPECT_NEAR(normal / n, 0.25, 0.01);
}

TEST(RunProtocol, RecordInvariantsHoldInEveryScenario) {
  for (auto s : {Scenario::Honest, Scenario::SeparableEve, Scenario::DetectionLoophole,
                 Scenario::FreeChoice}) {
    const auto t = run(config_for(s, 5000));
    const CheckingAngles q;
    for (const auto& r : t.rounds) {
      EXPECT_EQ(r.sift_status == SiftStatus::Discarded, r.phase_a != r.phase_b);
      if (r.sift_status == SiftStatus::NormalPhase) {
        EXPECT_EQ(r.setting_a, MeasurementSetting::z());
        EXPECT_EQ(r.setting_b, MeasurementSetting::z());
      }
      if (r.sift_status == SiftStatus::CheckingPhase) {
        EXPECT_TRUE(r.setting_a == q.a || r.setting_a == q.a_prime);
        EXPECT_TRUE(r.setting_b == q.b || r.setting_b == q.b_prime);
      }
      if (s != Scenario::DetectionLoophole) {
        EXPECT_TRUE(detected(r.outcome_a) && detected(r.outcome_b));
      }
      EXPECT_EQ(r.lambda_ref.has_value(),
                s == Scenario::DetectionLoophole || s == Scenario::FreeChoice);
    }
  }
}

TEST(Sift, Definition) {
  const std::vector<RoundRecord> rounds{with_phases(0, Phase::Normal, Phase::Normal),
                                        with_phases(1, Phase::Normal, Phase::Checking),
                                        with_phases(2, Phase::Checking, Phase::Checking)};
  const auto s = sift(rounds);
  ASSERT_EQ(s.normal.size(), 1u);
  ASSERT_EQ(s.checking.size(), 1u);
  EXPECT_EQ(s.normal[0].round_index, 0u);
  EXPECT_EQ(s.checking[0].round_index, 2u);

  const auto empty = sift(std::vector<RoundRecord>{});
  EXPECT_TRUE(empty.normal.empty());
  EXPECT_TRUE(empty.checking.empty());
}

TEST(Sift, IsAnOrderPreservingPartition) {
  const auto& t = honest_100k();
  const auto s = sift(t);
  std::size_t discarded = 0;
  for (const auto& r : t.rounds) discarded += r.sift_status == SiftStatus::Discarded;
  EXPECT_EQ(s.normal.size() + s.checking.size() + discarded, t.rounds.size());
  for (std::size_t i = 1; i < s.normal.size(); ++i) {
    EXPECT_LT(s.normal[i - 1].round_index, s.normal[i].round_index);
  }
  for (std::size_t i = 1; i < s.checking.size(); ++i) {
    EXPECT_LT(s.checking[i - 1].round_index, s.checking[i].round_index);
  }
  const double matched = static_cast<double>(s.normal.size() + s.checking.size());
  EXPECT_NEAR(s.checking.size() / matched, 0.5, 0.01);
}

TEST(ExtractKey, BobFlipsHisBit) {
  auto r = with_phases(0, Phase::Normal, Phase::Normal);
  r.outcome_a = Outcome::Plus;
  r.outcome_b = Outcome::Minus;
  auto r2 = with_phases(1, Phase::Normal, Phase::Normal);
  r2.outcome_a = Outcome::Minus;
  r2.outcome_b = Outcome::Plus;
  const auto key = extract_key({r, r2});
  EXPECT_EQ(key.bits_a, (std::vector<std::uint8_t>{1, 0}));
  EXPECT_EQ(key.bits_b, (std::vector<std::uint8_t>{1, 0}));
  EXPECT_EQ(key.source_rounds, (std::vector<std::uint64_t>{0, 1}));
}

TEST(ExtractKey, DropsNonDetectionsAndRejectsWrongPhase) {
  auto r = with_phases(3, Phase::Normal, Phase::Normal);
  r.outcome_b = Outcome::NoDetection;
  const auto key = extract_key({r});
  EXPECT_EQ(key.size(), 0u);
  EXPECT_EQ(key.undetected_rounds, (std::vector<std::uint64_t>{3}));
  EXPECT_THROW(extract_key({with_phases(0, Phase::Checking, Phase::Checking)}),
               std::invalid_argument);
}

TEST(ExtractKey, QberIsZeroInEveryScenario) {
  for (auto s : {Scenario::Honest, Scenario::SeparableEve, Scenario::DetectionLoophole,
                 Scenario::FreeChoice}) {
    const auto key = extract_key(sift(run(config_for(s, 100'000))).normal);
    ASSERT_GT(key.size(), 20000u) << to_string(s);
    EXPECT_EQ(key.bits_a, key.bits_b) << to_string(s);
    EXPECT_EQ(qber(key), 0.0) << to_string(s);
    EXPECT_TRUE(key.undetected_rounds.empty()) << to_string(s);
  }
}

TEST(EvaluateChecking, HonestViolates) {
  const auto c = config_for(Scenario::Honest, 400'000);
  const auto parts = sift(run(c));
  ASSERT_GT(parts.checking.size(), 95'000u);
  for (auto counting : {Counting::CoincidencesOnly, Counting::AllEvents}) {
    const auto r = evaluate_checking(parts.checking, c, counting);
    EXPECT_NEAR(std::abs(r.s_hat), 2.8284271, 0.03);
    EXPECT_TRUE(r.violates);
  }
}

TEST(EvaluateChecking, SeparableDoesNotViolate) {
  const auto c = config_for(Scenario::SeparableEve, 400'000);
  const auto r = evaluate_checking(sift(run(c)).checking, c, Counting::CoincidencesOnly);
  EXPECT_LE(std::abs(r.s_hat), 2.0 + 3 * r.std_error);
  EXPECT_FALSE(r.violates);
}

TEST(EvaluateChecking, Errors) {
  const auto c = config_for(Scenario::Honest, 10);
  EXPECT_THROW(evaluate_checking({}, c, Counting::CoincidencesOnly), std::domain_error);
  EXPECT_THROW(evaluate_checking({with_phases(0, Phase::Normal, Phase::Normal)}, c,
                                 Counting::CoincidencesOnly),
               std::invalid_argument);
  auto foreign = with_phases(0, Phase::Checking, Phase::Checking);
  foreign.setting_a = MeasurementSetting(1.0, SettingLabel::A);
  EXPECT_THROW(evaluate_checking({foreign}, c, Counting::CoincidencesOnly), std::invalid_argument);
}

TEST(RunProtocol, HonestSettingChoicesAreIndependent) {
  const auto checking = sift(honest_100k()).checking;
  std::map<std::pair<SettingLabel, SettingLabel>, std::size_t> counts;
  for (const auto& r : checking) counts[{r.setting_a.label(), r.setting_b.label()}]++;
  ASSERT_EQ(counts.size(), 4u);
  const double n = static_cast<double>(checking.size());
  for (const auto& [pair, k] : counts) EXPECT_NEAR(k / n, 0.25, 5 / std::sqrt(n));
}

TEST(Transcript, TextFormat) {
  const auto t = run(config_for(Scenario::DetectionLoophole, 50, 3));
  const auto text = serialized(t);
  std::istringstream lines(text);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "# e91-transcript v1");
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("# scenario=detection-loophole n_rounds=50 seed=3 angles=0,", 0), 0u) << line;
  std::getline(lines, line);
  EXPECT_EQ(line, "round,phase_a,phase_b,setting_a,setting_b,outcome_a,outcome_b,sift,lambda");

  std::istringstream in(text);
  const auto back = read_transcript(in);
  EXPECT_EQ(back.rounds, t.rounds);
  EXPECT_EQ(back.config.n_rounds, 50u);
  EXPECT_EQ(back.config.scenario, Scenario::DetectionLoophole);
  EXPECT_EQ(serialized(back), text);
}

TEST(Transcript, RejectsGarbage) {
  std::istringstream in("not a transcript\n");
  EXPECT_THROW(read_transcript(in), std::invalid_argument);
}
