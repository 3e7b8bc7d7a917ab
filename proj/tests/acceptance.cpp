// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "e91/adversaries.hpp"
#include "e91/cli.hpp"
#include "e91/report.hpp"
#include "e91/timing_channel.hpp"
#include "support/local_strategy.hpp"

using namespace e91;
namespace fs = std::filesystem;

namespace {

constexpr double kTsirelson = 2.8284271;
constexpr double kTolerance = 0.03;

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

ProtocolConfig config_for(Scenario s, std::uint64_t rounds, std::uint64_t seed) {
  ProtocolConfig c;
  c.scenario = s;
  c.n_rounds = rounds;
  c.master_seed = seed;
  return c;
}

std::uint64_t nondetections(const ChshResult& r) {
  std::uint64_t n = 0;
  for (const auto& t : r.terms) n += t.n_nondetect;
  return n;
}

double coincidence_rate(const ChshResult& all_events) {
  std::uint64_t total = 0;
  for (const auto& t : all_events.terms) total += t.total();
  return 1.0 - static_cast<double>(nondetections(all_events)) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------

Check honest() {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  const auto run = run_scenario(config_for(Scenario::Honest, 400'000, 2024));
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto& r = run.report;
  const double s_co = std::abs(r.chsh_coincidences.s_hat);
  const double s_all = std::abs(r.chsh_all_events.s_hat);
  c.detail << "|S| coinc=" << s_co << " all=" << s_all << " qber=" << r.qber << " runtime=" << seconds
           << "s";
  c.expect(std::abs(s_co - kTsirelson) <= kTolerance, "coincidences |S|");
  c.expect(std::abs(s_all - kTsirelson) <= kTolerance, "all-events |S|");
  c.expect(r.qber == 0.0, "qber");
  c.expect(seconds < 60.0, "runtime");
  return c;
}

Check separable() {
  Check c;
  const auto run = run_scenario(config_for(Scenario::SeparableEve, 400'000, 2024));
  const auto& r = run.report;
  c.detail << "|S| coinc=" << std::abs(r.chsh_coincidences.s_hat)
           << " all=" << std::abs(r.chsh_all_events.s_hat) << " qber=" << r.qber
           << " eve_match=" << *r.eve_key_match_fraction;
  c.expect(!r.chsh_coincidences.violates, "coincidences violates");
  c.expect(!r.chsh_all_events.violates, "all-events violates");
  c.expect(r.qber == 0.0, "qber");
  c.expect(run.eve_bits == run.key.bits_a, "eve key");
  return c;
}

Check detection_loophole() {
  Check c;
  const auto run = run_scenario(config_for(Scenario::DetectionLoophole, 400'000, 2024));
  const auto& r = run.report;
  const double s_co = std::abs(r.chsh_coincidences.s_hat);
  const double s_all = std::abs(r.chsh_all_events.s_hat);
  const double rate = coincidence_rate(r.chsh_all_events);
  c.detail << "|S| coinc=" << s_co << " all=" << s_all << " coincidence_rate=" << rate;
  c.expect(std::abs(s_co - 2.828) <= kTolerance && r.chsh_coincidences.violates,
           "coincidences |S|");
  c.expect(std::abs(s_all - 0.7071) <= kTolerance && !r.chsh_all_events.violates,
           "all-events |S|");
  c.expect(std::abs(rate - 0.25) <= 0.01, "coincidence rate");
  return c;
}

Check free_choice() {
  Check c;
  const auto run = run_scenario(config_for(Scenario::FreeChoice, 400'000, 2024));
  const auto& r = run.report;
  const double s_all = std::abs(r.chsh_all_events.s_hat);
  c.detail << "non-detections=" << nondetections(r.chsh_all_events) << " |S| all=" << s_all
           << " eve_match=" << *r.eve_key_match_fraction << " eve_mi=" << *r.eve_mi;
  c.expect(nondetections(r.chsh_all_events) == 0, "non-detections");
  c.expect(std::abs(s_all - 2.828) <= kTolerance && r.chsh_all_events.violates, "all-events |S|");
  c.expect(*r.eve_key_match_fraction == 1.0, "eve key match");
  c.expect(std::abs(*r.eve_mi - 1.0) <= 0.01, "eve mi");
  return c;
}

// ---------------------------------------------------------------------------
// Oracle equivalence. Each scenario's own sampling path is driven at a fixed
// setting pair and compared cell by cell with the exact table.

constexpr std::uint64_t kOracleSamples = 1'000'000;

using Sampler = std::function<std::pair<Outcome, Outcome>(
    std::uint64_t round, const MeasurementSetting&, const MeasurementSetting&)>;

int cell_index(Outcome a, Outcome b) {
  return (a == Outcome::Plus ? 0 : 2) + (b == Outcome::Plus ? 0 : 1);
}

// Returns the worst |freq - p| / (4/sqrt(N)) ratio over cells and pairs.
double oracle_ratio(const Sampler& sample, const std::function<ProbabilityTable(
                                               const MeasurementSetting&, const MeasurementSetting&)>& exact,
                    std::uint64_t* min_n) {
  const CheckingAngles q;
  double worst = 0.0;
  *min_n = ~std::uint64_t{0};
  const std::array<std::pair<MeasurementSetting, MeasurementSetting>, 4> pairs{
      {{q.a, q.b}, {q.a, q.b_prime}, {q.a_prime, q.b}, {q.a_prime, q.b_prime}}};
  for (const auto& [sa, sb] : pairs) {
    std::array<double, 4> counts{};
    std::uint64_t n = 0;
    for (std::uint64_t round = 0; n < kOracleSamples; ++round) {
      const auto [oa, ob] = sample(round, sa, sb);
      if (!detected(oa) || !detected(ob)) continue;
      counts[cell_index(oa, ob)] += 1;
      ++n;
    }
    *min_n = std::min(*min_n, n);
    const auto t = exact(sa, sb);
    const std::array<double, 4> p{t.p_pp, t.p_pm, t.p_mp, t.p_mm};
    const double bound = 4.0 / std::sqrt(static_cast<double>(n));
    for (int k = 0; k < 4; ++k) {
      worst = std::max(worst, std::abs(counts[k] / static_cast<double>(n) - p[k]) / bound);
    }
  }
  return worst;
}

Check oracle_equivalence() {
  Check c;
  const CheckingAngles q;
  constexpr std::uint64_t kSeed = 77;
  const auto singlet_table = [](const MeasurementSetting& a, const MeasurementSetting& b) {
    return joint_probabilities(singlet(), a, b);
  };

  // Same state preparation and joint sampling as the protocol runner.
  const auto quantum_sampler = [&](const Source& source) {
    return [&source](std::uint64_t round, const MeasurementSetting& a, const MeasurementSetting& b) {
      RoundStream source_stream(kSeed, StreamRole::Source, round);
      RoundStream measurement(kSeed, StreamRole::Measurement, round);
      const auto e = source.emit(round, source_stream);
      return sample_outcomes(joint_probabilities(std::get<TwoQubitState>(e.payload), a, b),
                             measurement.uniform());
    };
  };
  const auto decode = [](const Source& source, std::uint64_t round) {
    RoundStream stream(kSeed, StreamRole::Source, round);
    return timing::decode_lambda(std::get<TimingPulse>(source.emit(round, stream).payload).offset_ns);
  };

  const HonestSource honest;
  const SeparableSource separable;
  const DetectionLoopholeSource loophole;
  const FreeChoiceSource free_choice(q, {ScheduleAlgorithm::SplitMix64, 1},
                                     {ScheduleAlgorithm::SplitMix64, 2});

  struct Case {
    const char* name;
    Sampler sample;
    std::function<ProbabilityTable(const MeasurementSetting&, const MeasurementSetting&)> exact;
  };
  const std::vector<Case> cases{
      {"honest", quantum_sampler(honest), singlet_table},
      {"separable-eve", quantum_sampler(separable),
       [](const MeasurementSetting& a, const MeasurementSetting& b) {
         // Equal mixture of |0>|1> and |1>|0>.
         const auto x = joint_probabilities(TwoQubitState::basis(0, 1), a, b);
         const auto y = joint_probabilities(TwoQubitState::basis(1, 0), a, b);
         return ProbabilityTable{(x.p_pp + y.p_pp) / 2, (x.p_pm + y.p_pm) / 2,
                                 (x.p_mp + y.p_mp) / 2, (x.p_mm + y.p_mm) / 2};
       }},
      {"detection-loophole",
       [&](std::uint64_t round, const MeasurementSetting& a, const MeasurementSetting& b) {
         const auto l = decode(loophole, round);
         return std::pair{detection_loophole_device_measure(l, a, Party::Alice, q),
                          detection_loophole_device_measure(l, b, Party::Bob, q)};
       },
       singlet_table},
      {"free-choice",
       [&](std::uint64_t round, const MeasurementSetting& a, const MeasurementSetting& b) {
         const auto l = decode(free_choice, round);
         return std::pair{free_choice_device_measure(l, a, b, Party::Alice),
                          free_choice_device_measure(l, b, a, Party::Bob)};
       },
       singlet_table},
  };

  for (const auto& k : cases) {
    std::uint64_t n = 0;
    const double ratio = oracle_ratio(k.sample, k.exact, &n);
    c.detail << k.name << " worst=" << ratio << "x(4/sqrtN) ";
    c.expect(ratio <= 1.0, k.name);
  }
  c.detail << "N=" << kOracleSamples << " per setting pair";
  return c;
}

// ---------------------------------------------------------------------------

Check locality_control() {
  Check c;
  const CheckingAngles q;
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 10; ++k) {
    const auto strategy = e91::testing::LocalStrategy::random(500 + k, k < 5);
    const auto r = e91::testing::run_local_strategy(strategy, 9000 + k, 100'000, q);
    const double excess = (std::abs(r.s_hat) - 2.0) / r.std_error;
    worst = std::max(worst, excess);
    c.expect(std::abs(r.s_hat) <= 2.0 + 5.0 * r.std_error, "strategy " + std::to_string(k));
  }
  c.detail << "10 strategies, worst (|S|-2)/stderr=" << worst;
  return c;
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::string drop_runtime_json(const std::string& text) {
  auto j = Json::parse(text);
  j.erase("runtime_ms");
  return j.dump(2);
}

std::string drop_runtime_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line, kept;
  while (std::getline(in, line)) {
    if (line.rfind("/runtime_ms,", 0) != 0) kept += line + "\n";
  }
  return kept;
}

Check determinism() {
  Check c;
  const fs::path dir = fs::temp_directory_path() / "e91_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  int compared = 0;
  for (const char* scenario : {"honest", "separable-eve", "detection-loophole", "free-choice"}) {
    for (const char* format : {"json", "csv"}) {
      std::array<std::string, 2> report, transcript, timing;
      for (int i = 0; i < 2; ++i) {
        const auto stem = dir / (std::string(scenario) + "_" + format + "_" + std::to_string(i));
        std::ostringstream out, err;
        const int code = cli::main({"run", "--scenario", scenario, "--rounds", "50000", "--seed",
                                    "31337", "--format", format, "--out", stem.string() + ".report",
                                    "--transcript", stem.string() + ".transcript", "--timing-log",
                                    stem.string() + ".timing"},
                                   out, err);
        c.expect(code == cli::kExitOk, std::string(scenario) + " exit code");
        const std::string body = slurp(stem.string() + ".report");
        report[i] = std::string(format) == "json" ? drop_runtime_json(body) : drop_runtime_csv(body);
        transcript[i] = slurp(stem.string() + ".transcript");
        timing[i] = slurp(stem.string() + ".timing");
      }
      c.expect(!transcript[0].empty(), std::string(scenario) + " transcript written");
      c.expect(report[0] == report[1], std::string(scenario) + " " + format + " report");
      c.expect(transcript[0] == transcript[1], std::string(scenario) + " transcript");
      c.expect(timing[0] == timing[1], std::string(scenario) + " timing log");
      ++compared;
    }
  }
  fs::remove_all(dir);
  c.detail << compared << " run pairs compared (reports, transcripts, timing logs)";
  return c;
}

Check timing_codec() {
  Check c;
  int exact = 0;
  for (std::uint64_t i = 0; i < 10'000; ++i) {
    RoundStream s(4242, StreamRole::Source, i);
    HiddenVariable l;
    l.u1 = timing::quantize_u1(s.uniform());
    l.u2 = timing::quantize_u2(s.uniform());
    if (s.coin()) {
      l.intended_setting_a = s.coin() ? SettingLabel::APrime : SettingLabel::A;
      l.intended_setting_b = s.coin() ? SettingLabel::BPrime : SettingLabel::B;
      l.intended_phase_a = s.coin() ? Phase::Checking : Phase::Normal;
      l.intended_phase_b = s.coin() ? Phase::Checking : Phase::Normal;
    }
    const auto offset = timing::encode_lambda(l);
    if (offset < timing::kOffsetLimit && timing::decode_lambda(offset) == l) ++exact;
  }
  c.expect(exact == 10'000, "round trips");

  int rejected = 0;
  for (std::uint32_t offset : {timing::kOffsetLimit, timing::kOffsetLimit + 1, 0xFFFFFFFFu,
                               timing::kOffsetLimit * 2}) {
    try {
      timing::decode_lambda(offset);
    } catch (const std::invalid_argument&) {
      ++rejected;
    }
  }
  c.expect(rejected == 4, "out-of-range offsets");
  c.detail << exact << "/10000 exact round trips, " << rejected << "/4 out-of-range offsets rejected";
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Check()>>> criteria{
      {"honest singlet statistics", honest},
      {"separable source is detected", separable},
      {"detection loophole", detection_loophole},
      {"free-choice loophole", free_choice},
      {"sampling matches exact tables", oracle_equivalence},
      {"local strategies respect the bound", locality_control},
      {"deterministic outputs", determinism},
      {"timing codec", timing_codec},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    try {
      c = criteria[i].second();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail << " [exception: " << e.what() << "]";
    }
    if (!c.ok) ++failures;
    std::cout << (c.ok ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": "
              << c.detail.str() << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
