#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "e91/protocol.hpp"

namespace e91 {

struct ScenarioReport {
  Scenario scenario = Scenario::Honest;
  std::uint64_t n_rounds = 0;
  std::uint64_t seed = 0;
  ChshResult chsh_coincidences;
  ChshResult chsh_all_events;
  double qber = 0.0;
  std::uint64_t key_length = 0;
  /// Present iff scenario != Honest.
  std::optional<double> eve_mi;
  std::optional<double> eve_key_match_fraction;
  std::int64_t runtime_ms = 0;
};

/// Everything one scenario run produces.
struct ScenarioRun {
  Transcript transcript;
  SiftedKey key;
  std::vector<std::uint8_t> eve_bits;
  ScenarioReport report;
};

/// Runs the protocol for config.scenario and evaluates it. Throws
/// std::invalid_argument for a bad config and std::domain_error when the data
/// cannot be evaluated (empty key, empty setting group).
ScenarioRun run_scenario(const ProtocolConfig& config);

using Json = nlohmann::ordered_json;

Json to_json(const ChshResult& r);
Json to_json(const ScenarioReport& r);
/// Throws std::invalid_argument if the document does not follow the report
/// schema (docs/report.schema.json).
ScenarioReport report_from_json(const Json& j);
void validate_report(const Json& j);

/// Two-column CSV: "field,value", one row per scalar, field names are JSON
/// pointers into the JSON report (e.g. /chsh_coincidences/terms/0/n_pp).
std::string to_csv(const ScenarioReport& r);
ScenarioReport report_from_csv(const std::string& text);

/// Reads a JSON or CSV report, deciding by the first non-blank character.
ScenarioReport load_report(const std::string& path);

}  // namespace e91
