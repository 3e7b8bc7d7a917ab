#include "e91/protocol.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "e91/timing_channel.hpp"

namespace e91 {

namespace {

bool uses_timing_channel(Scenario s) {
  return s == Scenario::DetectionLoophole || s == Scenario::FreeChoice;
}

void check_device(const Device& device, Party expected, const ProtocolConfig& config) {
  const char* who = expected == Party::Alice ? "device A" : "device B";
  if (device.party() != expected) {
    throw std::invalid_argument(std::string(who) + " is wired to the wrong party");
  }
  if (!device.supports(config.scenario)) {
    throw std::invalid_argument(std::string(who) + " does not support scenario " +
                                std::string(to_string(config.scenario)));
  }
  if (device.reads_timing_channel() != uses_timing_channel(config.scenario)) {
    throw std::invalid_argument(std::string(who) + " disagrees with the source on lambda transport");
  }
  const auto [unprimed, primed] = config.checking_angles.pair_for(expected);
  if (device.unprimed_setting() != unprimed || device.primed_setting() != primed) {
    throw std::invalid_argument(std::string(who) + " checking settings differ from the config");
  }
}

SiftStatus sift_status_for(Phase a, Phase b) {
  if (a != b) return SiftStatus::Discarded;
  return a == Phase::Normal ? SiftStatus::NormalPhase : SiftStatus::CheckingPhase;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  return out;
}

template <typename T>
T parse_integer(const std::string& text, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument(std::string("malformed ") + what + " '" + text + "'");
  }
  return value;
}

double parse_double(const std::string& text) {
  std::size_t used = 0;
  const double v = std::stod(text, &used);
  if (used != text.size()) throw std::invalid_argument("malformed number '" + text + "'");
  return v;
}

MeasurementSetting setting_for_label(SettingLabel label, const CheckingAngles& q) {
  switch (label) {
    case SettingLabel::A: return q.a;
    case SettingLabel::APrime: return q.a_prime;
    case SettingLabel::B: return q.b;
    case SettingLabel::BPrime: return q.b_prime;
    case SettingLabel::Z: return MeasurementSetting::z();
    case SettingLabel::Custom: break;
  }
  throw std::invalid_argument("custom settings cannot appear in a transcript");
}

constexpr const char* kTranscriptMagic = "# e91-transcript v1";
constexpr const char* kColumns =
    "round,phase_a,phase_b,setting_a,setting_b,outcome_a,outcome_b,sift,lambda";

}  // namespace

Device::Device(Party party, const CheckingAngles& angles)
    : party_(party),
      unprimed_(angles.pair_for(party).first),
      primed_(angles.pair_for(party).second) {}

BasisChoice Device::choose(std::uint64_t, RoundStream& phase_stream,
                           RoundStream& setting_stream) const {
  const bool checking = phase_stream.coin();
  const bool primed = setting_stream.coin();
  return choice_from_bits(checking, primed);
}

BasisChoice Device::choice_from_bits(bool checking, bool primed) const {
  if (!checking) return {Phase::Normal, MeasurementSetting::z()};
  return {Phase::Checking, primed ? primed_ : unprimed_};
}

Outcome Device::respond(const HiddenVariable&, std::uint64_t, const BasisChoice&) const {
  throw std::logic_error("this device measures qubits and does not read the timing channel");
}

Transcript run_protocol(const ProtocolConfig& config, const Source& source,
                        const Device& device_a, const Device& device_b) {
  config.validate();
  if (source.scenario() != config.scenario) {
    throw std::invalid_argument("source scenario " + std::string(to_string(source.scenario())) +
                                " does not match config scenario " +
                                std::string(to_string(config.scenario)));
  }
  check_device(device_a, Party::Alice, config);
  check_device(device_b, Party::Bob, config);

  Transcript t;
  t.config = config;
  t.rounds.reserve(config.n_rounds);
  const std::uint64_t seed = config.master_seed;

  for (std::uint64_t i = 0; i < config.n_rounds; ++i) {
    RoundStream source_stream(seed, StreamRole::Source, i);
    Emission emission = source.emit(i, source_stream);

    RoundStream phase_a(seed, StreamRole::PhaseA, i);
    RoundStream setting_a(seed, StreamRole::SettingA, i);
    RoundStream phase_b(seed, StreamRole::PhaseB, i);
    RoundStream setting_b(seed, StreamRole::SettingB, i);
    const BasisChoice choice_a = device_a.choose(i, phase_a, setting_a);
    const BasisChoice choice_b = device_b.choose(i, phase_b, setting_b);

    RoundRecord rec;
    rec.round_index = i;
    rec.phase_a = choice_a.phase;
    rec.phase_b = choice_b.phase;
    rec.setting_a = choice_a.setting;
    rec.setting_b = choice_b.setting;
    rec.sift_status = sift_status_for(choice_a.phase, choice_b.phase);

    if (const auto* state = std::get_if<TwoQubitState>(&emission.payload)) {
      if (device_a.reads_timing_channel() || device_b.reads_timing_channel()) {
        throw std::logic_error("quantum emission reached a timing-channel device");
      }
      RoundStream measurement(seed, StreamRole::Measurement, i);
      const auto table = joint_probabilities(*state, choice_a.setting, choice_b.setting);
      const auto [oa, ob] = sample_outcomes(table, measurement.uniform());
      rec.outcome_a = oa;
      rec.outcome_b = ob;
    } else {
      const auto& pulse = std::get<TimingPulse>(emission.payload);
      // Each device reads the pulse timing on its own.
      rec.outcome_a = device_a.respond(timing::decode_lambda(pulse.offset_ns), i, choice_a);
      rec.outcome_b = device_b.respond(timing::decode_lambda(pulse.offset_ns), i, choice_b);
      rec.lambda_ref = pulse.offset_ns;
      t.timing_log.push_back(pulse);
    }
    if (emission.eve) t.eve_log.push_back(*emission.eve);
    t.rounds.push_back(rec);
  }
  return t;
}

SiftResult sift(const Transcript& transcript) { return sift(transcript.rounds); }

SiftResult sift(const std::vector<RoundRecord>& rounds) {
  SiftResult out;
  for (const auto& r : rounds) {
    if (r.sift_status == SiftStatus::NormalPhase) out.normal.push_back(r);
    else if (r.sift_status == SiftStatus::CheckingPhase) out.checking.push_back(r);
  }
  return out;
}

SiftedKey extract_key(const std::vector<RoundRecord>& normal) {
  SiftedKey key;
  for (const auto& r : normal) {
    if (r.sift_status != SiftStatus::NormalPhase) {
      throw std::invalid_argument("round " + std::to_string(r.round_index) +
                                  " is not a normal-phase round");
    }
    if (!detected(r.outcome_a) || !detected(r.outcome_b)) {
      key.undetected_rounds.push_back(r.round_index);
      continue;
    }
    key.bits_a.push_back(r.outcome_a == Outcome::Plus ? 1 : 0);
    key.bits_b.push_back(r.outcome_b == Outcome::Plus ? 0 : 1);
    key.source_rounds.push_back(r.round_index);
  }
  return key;
}

ChshResult evaluate_checking(const std::vector<RoundRecord>& checking,
                             const ProtocolConfig& config, Counting counting) {
  if (checking.empty()) throw std::domain_error("no checking-phase rounds to evaluate");
  for (const auto& r : checking) {
    if (r.sift_status != SiftStatus::CheckingPhase) {
      throw std::invalid_argument("round " + std::to_string(r.round_index) +
                                  " is not a checking-phase round");
    }
  }
  return chsh_estimate(checking, config.checking_angles, counting);
}

void write_transcript(std::ostream& out, const Transcript& transcript) {
  const auto& c = transcript.config;
  const auto& q = c.checking_angles;
  out << kTranscriptMagic << '\n'
      << "# scenario=" << to_string(c.scenario) << " n_rounds=" << c.n_rounds
      << " seed=" << c.master_seed << " angles=" << format_double(q.a.angle()) << ','
      << format_double(q.a_prime.angle()) << ',' << format_double(q.b.angle()) << ','
      << format_double(q.b_prime.angle()) << '\n'
      << kColumns << '\n';
  for (const auto& r : transcript.rounds) {
    out << r.round_index << ',' << to_string(r.phase_a) << ',' << to_string(r.phase_b) << ','
        << to_string(r.setting_a.label()) << ',' << to_string(r.setting_b.label()) << ','
        << to_string(r.outcome_a) << ',' << to_string(r.outcome_b) << ','
        << to_string(r.sift_status) << ',';
    if (r.lambda_ref) out << *r.lambda_ref;
    else out << '-';
    out << '\n';
  }
}

Transcript read_transcript(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTranscriptMagic) {
    throw std::invalid_argument("missing transcript header");
  }
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw std::invalid_argument("missing transcript config line");
  }
  Transcript t;
  double angles[4] = {0, 0, 0, 0};
  for (const auto& kv : split(line.substr(2), ' ')) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("malformed config entry '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string val = kv.substr(eq + 1);
    if (key == "scenario") t.config.scenario = scenario_from_string(val);
    else if (key == "n_rounds") t.config.n_rounds = parse_integer<std::uint64_t>(val, "n_rounds");
    else if (key == "seed") t.config.master_seed = parse_integer<std::uint64_t>(val, "seed");
    else if (key == "angles") {
      const auto parts = split(val, ',');
      if (parts.size() != 4) throw std::invalid_argument("angles need four values");
      for (int i = 0; i < 4; ++i) angles[i] = parse_double(parts[i]);
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  t.config.checking_angles = CheckingAngles::from_radians(angles[0], angles[1], angles[2], angles[3]);
  if (!std::getline(in, line) || line != kColumns) {
    throw std::invalid_argument("missing transcript column header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 9) throw std::invalid_argument("malformed transcript line: " + line);
    RoundRecord r;
    r.round_index = parse_integer<std::uint64_t>(f[0], "round index");
    r.phase_a = phase_from_string(f[1]);
    r.phase_b = phase_from_string(f[2]);
    r.setting_a = setting_for_label(setting_label_from_string(f[3]), t.config.checking_angles);
    r.setting_b = setting_for_label(setting_label_from_string(f[4]), t.config.checking_angles);
    r.outcome_a = outcome_from_string(f[5]);
    r.outcome_b = outcome_from_string(f[6]);
    r.sift_status = sift_status_from_string(f[7]);
    if (f[8] != "-") r.lambda_ref = parse_integer<std::uint32_t>(f[8], "lambda offset");
    t.rounds.push_back(r);
  }
  return t;
}

}  // namespace e91
