#include "e91/report.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "e91/adversaries.hpp"

namespace e91 {

namespace {

const char* counting_key(Counting c) { return c == Counting::CoincidencesOnly ? "chsh_coincidences" : "chsh_all_events"; }

template <typename T>
T require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw std::invalid_argument(std::string("report is missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument(std::string("report field '") + key + "' has the wrong type");
  }
}

void require_number(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw std::invalid_argument(std::string("report field '") + key + "' must be a number");
  }
}

void require_unsigned(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_unsigned()) {
    throw std::invalid_argument(std::string("report field '") + key +
                                "' must be a non-negative integer");
  }
}

void validate_chsh(const Json& j, const char* name, Counting expected) {
  if (!j.is_object()) throw std::invalid_argument(std::string(name) + " must be an object");
  if (require<std::string>(j, "counting") != to_string(expected)) {
    throw std::invalid_argument(std::string(name) + " has the wrong counting convention");
  }
  require_number(j, "s_hat");
  require_number(j, "stderr");
  if (!j.contains("violates") || !j.at("violates").is_boolean()) {
    throw std::invalid_argument(std::string(name) + ".violates must be a boolean");
  }
  if (!j.contains("terms") || !j.at("terms").is_array() || j.at("terms").size() != 4) {
    throw std::invalid_argument(std::string(name) + ".terms must hold four entries");
  }
  for (const auto& t : j.at("terms")) {
    require<std::string>(t, "setting_a");
    require<std::string>(t, "setting_b");
    for (const char* k : {"n_pp", "n_pm", "n_mp", "n_mm", "n_nondetect"}) require_unsigned(t, k);
    require_number(t, "e_hat");
    require_number(t, "stderr");
  }
}

ChshResult chsh_from_json(const Json& j) {
  ChshResult r;
  r.counting = require<std::string>(j, "counting") == to_string(Counting::CoincidencesOnly)
                   ? Counting::CoincidencesOnly
                   : Counting::AllEvents;
  r.s_hat = require<double>(j, "s_hat");
  r.std_error = require<double>(j, "stderr");
  r.violates = require<bool>(j, "violates");
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& t = j.at("terms").at(i);
    auto& e = r.terms[i];
    e.setting_pair = {setting_label_from_string(require<std::string>(t, "setting_a")),
                      setting_label_from_string(require<std::string>(t, "setting_b"))};
    e.n_pp = require<std::uint64_t>(t, "n_pp");
    e.n_pm = require<std::uint64_t>(t, "n_pm");
    e.n_mp = require<std::uint64_t>(t, "n_mp");
    e.n_mm = require<std::uint64_t>(t, "n_mm");
    e.n_nondetect = require<std::uint64_t>(t, "n_nondetect");
    e.e_hat = require<double>(t, "e_hat");
    e.std_error = require<double>(t, "stderr");
  }
  return r;
}

}  // namespace

ScenarioRun run_scenario(const ProtocolConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  ScenarioRun run;
  const ScenarioSetup setup = make_scenario(config);
  run.transcript = run_protocol(config, *setup.source, *setup.device_a, *setup.device_b);
  const SiftResult parts = sift(run.transcript);
  run.key = extract_key(parts.normal);

  auto& rep = run.report;
  rep.scenario = config.scenario;
  rep.n_rounds = config.n_rounds;
  rep.seed = config.master_seed;
  rep.chsh_coincidences = evaluate_checking(parts.checking, config, Counting::CoincidencesOnly);
  rep.chsh_all_events = evaluate_checking(parts.checking, config, Counting::AllEvents);
  rep.qber = qber(run.key);
  rep.key_length = run.key.size();

  if (config.scenario != Scenario::Honest) {
    run.eve_bits = eve_reconstruct_key(setup.eve, run.transcript.eve_log, run.key.source_rounds);
    rep.eve_mi = eve_mutual_information(run.eve_bits, run.key.bits_a).bits;
    std::size_t matches = 0;
    for (std::size_t i = 0; i < run.eve_bits.size(); ++i) {
      matches += run.eve_bits[i] == run.key.bits_a[i];
    }
    rep.eve_key_match_fraction =
        static_cast<double>(matches) / static_cast<double>(run.eve_bits.size());
  }
  rep.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return run;
}

Json to_json(const ChshResult& r) {
  Json terms = Json::array();
  for (const auto& t : r.terms) {
    terms.push_back({{"setting_a", to_string(t.setting_pair.first)},
                     {"setting_b", to_string(t.setting_pair.second)},
                     {"n_pp", t.n_pp},
                     {"n_pm", t.n_pm},
                     {"n_mp", t.n_mp},
                     {"n_mm", t.n_mm},
                     {"n_nondetect", t.n_nondetect},
                     {"e_hat", t.e_hat},
                     {"stderr", t.std_error}});
  }
  return {{"counting", to_string(r.counting)},
          {"s_hat", r.s_hat},
          {"stderr", r.std_error},
          {"violates", r.violates},
          {"terms", terms}};
}

Json to_json(const ScenarioReport& r) {
  Json j;
  j["scenario"] = to_string(r.scenario);
  j["n_rounds"] = r.n_rounds;
  j["seed"] = r.seed;
  j[counting_key(Counting::CoincidencesOnly)] = to_json(r.chsh_coincidences);
  j[counting_key(Counting::AllEvents)] = to_json(r.chsh_all_events);
  j["qber"] = r.qber;
  j["key_length"] = r.key_length;
  if (r.eve_mi) j["eve_mi"] = *r.eve_mi;
  if (r.eve_key_match_fraction) j["eve_key_match_fraction"] = *r.eve_key_match_fraction;
  j["runtime_ms"] = r.runtime_ms;
  return j;
}

void validate_report(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("report must be a JSON object");
  const auto scenario_name = require<std::string>(j, "scenario");
  const Scenario scenario = scenario_from_string(scenario_name);
  require_unsigned(j, "n_rounds");
  require_unsigned(j, "seed");
  validate_chsh(j.at("chsh_coincidences"), "chsh_coincidences", Counting::CoincidencesOnly);
  if (!j.contains("chsh_all_events")) throw std::invalid_argument("report is missing chsh_all_events");
  validate_chsh(j.at("chsh_all_events"), "chsh_all_events", Counting::AllEvents);
  require_number(j, "qber");
  require_unsigned(j, "key_length");
  require_number(j, "runtime_ms");
  const bool has_eve = j.contains("eve_mi");
  if (has_eve != (scenario != Scenario::Honest)) {
    throw std::invalid_argument("eve_mi must be present exactly when the scenario is not honest");
  }
  if (has_eve) {
    require_number(j, "eve_mi");
    require_number(j, "eve_key_match_fraction");
  } else if (j.contains("eve_key_match_fraction")) {
    throw std::invalid_argument("honest report carries eve_key_match_fraction");
  }
}

ScenarioReport report_from_json(const Json& j) {
  validate_report(j);
  ScenarioReport r;
  r.scenario = scenario_from_string(j.at("scenario").get<std::string>());
  r.n_rounds = j.at("n_rounds").get<std::uint64_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.chsh_coincidences = chsh_from_json(j.at("chsh_coincidences"));
  r.chsh_all_events = chsh_from_json(j.at("chsh_all_events"));
  r.qber = j.at("qber").get<double>();
  r.key_length = j.at("key_length").get<std::uint64_t>();
  if (j.contains("eve_mi")) r.eve_mi = j.at("eve_mi").get<double>();
  if (j.contains("eve_key_match_fraction")) {
    r.eve_key_match_fraction = j.at("eve_key_match_fraction").get<double>();
  }
  r.runtime_ms = j.at("runtime_ms").get<std::int64_t>();
  return r;
}

std::string to_csv(const ScenarioReport& r) {
  // flatten() sorts keys; walk the ordered document instead to keep the
  // field order of the JSON report.
  std::ostringstream out;
  out << "field,value\n";
  const auto emit = [&](const auto& self, const Json& node, const std::string& prefix) -> void {
    if (node.is_object()) {
      for (const auto& [k, v] : node.items()) self(self, v, prefix + "/" + k);
    } else if (node.is_array()) {
      for (std::size_t i = 0; i < node.size(); ++i) self(self, node[i], prefix + "/" + std::to_string(i));
    } else {
      out << prefix << ',' << node.dump() << '\n';
    }
  };
  emit(emit, to_json(r), "");
  return out.str();
}

ScenarioReport report_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "field,value") {
    throw std::invalid_argument("CSV report lacks the 'field,value' header");
  }
  nlohmann::json flat = nlohmann::json::object();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.empty() || line[0] != '/') {
      throw std::invalid_argument("malformed CSV report row: " + line);
    }
    try {
      flat[line.substr(0, comma)] = nlohmann::json::parse(line.substr(comma + 1));
    } catch (const nlohmann::json::exception&) {
      throw std::invalid_argument("malformed CSV report value: " + line);
    }
  }
  return report_from_json(Json::parse(flat.unflatten().dump()));
}

ScenarioReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read report '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return report_from_json(Json::parse(text));
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("report '" + path + "' is not valid JSON: " + e.what());
    }
  }
  return report_from_csv(text);
}

}  // namespace e91
