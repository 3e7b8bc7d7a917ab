#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "e91/rng.hpp"
#include "e91/stats.hpp"
#include "e91/types.hpp"

namespace e91 {

/// Emits one pair (or one hidden-variable pulse) per round. Implementations
/// must be pure functions of (round_index, stream).
class Source {
 public:
  virtual ~Source() = default;
  virtual Scenario scenario() const = 0;
  virtual Emission emit(std::uint64_t round_index, RoundStream& stream) const = 0;
};

/// One party's measurement device.
///
/// A device sees only its own streams, its own choice and, for devices that
/// read the timing channel, the decoded lambda. Nothing derived from the
/// peer's live choice or outcome ever reaches it.
class Device {
 public:
  Device(Party party, const CheckingAngles& angles);
  virtual ~Device() = default;

  Party party() const { return party_; }
  const MeasurementSetting& unprimed_setting() const { return unprimed_; }
  const MeasurementSetting& primed_setting() const { return primed_; }

  virtual bool supports(Scenario scenario) const = 0;

  /// Default: Normal or Checking with probability 1/2 each, and in Checking
  /// the unprimed or primed setting with probability 1/2 each.
  virtual BasisChoice choose(std::uint64_t round_index, RoundStream& phase_stream,
                             RoundStream& setting_stream) const;

  /// True for devices whose outcomes come from lambda instead of a qubit.
  virtual bool reads_timing_channel() const { return false; }

  /// Throws std::logic_error unless reads_timing_channel().
  virtual Outcome respond(const HiddenVariable& lambda, std::uint64_t round_index,
                          const BasisChoice& own) const;

 protected:
  BasisChoice choice_from_bits(bool checking, bool primed) const;

 private:
  Party party_;
  MeasurementSetting unprimed_;
  MeasurementSetting primed_;
};

/// Throws std::invalid_argument if the config is invalid or the source and
/// devices do not match config.scenario.
Transcript run_protocol(const ProtocolConfig& config, const Source& source,
                        const Device& device_a, const Device& device_b);

struct SiftResult {
  std::vector<RoundRecord> normal;
  std::vector<RoundRecord> checking;
};

SiftResult sift(const Transcript& transcript);
SiftResult sift(const std::vector<RoundRecord>& rounds);

/// Alice's bit = (s_a + 1) / 2, Bob's bit = 1 - (s_b + 1) / 2. Rounds with a
/// non-detection go to undetected_rounds. Throws std::invalid_argument for a
/// record that is not NormalPhase.
SiftedKey extract_key(const std::vector<RoundRecord>& normal);

/// Throws std::invalid_argument for a record outside the checking phase or
/// the configured quadruple, and std::domain_error when a setting pair has no
/// data.
ChshResult evaluate_checking(const std::vector<RoundRecord>& checking,
                             const ProtocolConfig& config, Counting counting);

// Transcript text format:
//   # e91-transcript v1
//   # scenario=<name> n_rounds=<n> seed=<s> angles=<a>,<a'>,<b>,<b'>
//   round,phase_a,phase_b,setting_a,setting_b,outcome_a,outcome_b,sift,lambda
//   <i>,<N|C>,<N|C>,<label>,<label>,<+1|-1|ND>,<+1|-1|ND>,<discarded|normal|checking>,<offset|->
// Angles use 17 significant digits so the file is a lossless, byte-stable
// function of the transcript.
void write_transcript(std::ostream& out, const Transcript& transcript);
/// Reads back config and rounds (eve and timing logs are not part of the file).
Transcript read_transcript(std::istream& in);

}  // namespace e91
