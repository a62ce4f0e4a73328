#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qsdc/bit_string.hpp"
#include "qsdc/protocol.hpp"
#include "qsdc/qubit.hpp"
#include "qsdc/random.hpp"

namespace qsdc {

enum class FlipPolicyKind { first_mismatch, majority };

// How Oscar reacts to a mismatching announcement. first_mismatch flips the
// candidate bit immediately. majority flips only once at least
// min_observations announcements have been seen for the bit since its last
// flip and the mismatch fraction among them exceeds mismatch_fraction.
struct FlipPolicy {
  FlipPolicyKind kind = FlipPolicyKind::first_mismatch;
  double mismatch_fraction = 0.5;
  std::size_t min_observations = 3;

  void validate() const;
};

struct Scene1Options {
  FlipPolicy flip_policy;
  // Random decoy qubits mixed around the probe; 0 means "same as u".
  std::size_t decoy_length = 0;
};

// Oscar's evolving candidate id_B with per-bit bookkeeping.
struct AttackState {
  BitString candidate;
  // Consecutive matching observations since the last flip.
  std::vector<std::size_t> match_count;
  std::vector<bool> ever_flipped;
  // Observations and mismatches since the last flip (majority policy).
  std::vector<std::size_t> observations;
  std::vector<std::size_t> mismatches;
  std::size_t iterations_run = 0;
  std::size_t total_flips = 0;
  // Announcement bits Oscar has received from Bob.
  std::size_t bits_observed = 0;

  static AttackState fresh(BitString candidate);
};

struct IterationLogEntry {
  std::size_t iteration;
  std::size_t position;
  QubitState sent_state;
  std::uint8_t announced_bit;
  bool flipped;
};

// One entry per mismatching observation.
using IterationLog = std::vector<IterationLogEntry>;

struct ConfidenceReport {
  std::vector<double> per_bit_confidence;
  double overall_confidence = 0.0;
  // Bits never flipped (the x of the worst-case formula).
  std::size_t unconfirmed_count = 0;
};

struct Scene1Result {
  AttackState state;
  ConfidenceReport report;
};

struct Scene2Result {
  Verdict alice_verdict = Verdict::reject;
  double mismatch_rate = 0.0;
  std::optional<BitString> recovered_ciphertext;
  std::vector<std::size_t> erasures;
};

enum class PlaintextModelKind { known_plaintext, biased_bits };

// How Oscar learns about the plaintext. biased_bits: every plaintext bit is 0
// with probability bias.
struct PlaintextModel {
  PlaintextModelKind kind = PlaintextModelKind::known_plaintext;
  double bias = 0.9;

  void validate() const;
};

struct KeyEstimate {
  BitString key_estimate;
  // Fraction of ciphertexts whose bit agrees with the estimate, per position.
  std::vector<double> per_bit_majority;
};

// Probe qubits: 0 -> |0>, 1 -> |->.
std::vector<QubitState> oscar_prepare(const BitString& candidate);

// Applies Bob's announcement for the probe to the candidate. sent holds the
// probe qubits, received_mask one entry per probe qubit and announcement one
// bit per received probe. Lost photons leave a bit's counters untouched.
void update_candidate(AttackState& state, std::span<const QubitState> sent,
                      const BitString& announcement, const std::vector<bool>& received_mask,
                      const FlipPolicy& policy, IterationLog* log = nullptr);

// One fake session impersonating Alice against honest Bob.
AttackState scene1_iteration(AttackState state, const BitString& true_id_b,
                             const ChannelConfig& channel, RandomSource& rng,
                             const Scene1Options& options = {}, IterationLog* log = nullptr);

// Per never-flipped bit 1 - 2^-match_count; flipped bits count as 1.
ConfidenceReport confidence_report(const AttackState& state);

Scene1Result scene1_run(std::size_t u, std::size_t k, const BitString& true_id_b,
                        const BitString& initial, const ChannelConfig& channel,
                        RandomSource& rng, const Scene1Options& options = {},
                        IterationLog* log = nullptr);

// Oscar answers a genuine session in Bob's place using oscar_id_b; when Alice
// accepts he reads C in the bases she announces.
Scene2Result scene2_intercept(const BitString& message, const BitString& id_a,
                              const BitString& true_id_b, const BitString& oscar_id_b,
                              const ChannelConfig& channel, const VerificationPolicy& policy,
                              RandomSource& rng);

BitString xor_recover_known_plaintext(const BitString& ciphertext, const BitString& plaintext);

// Majority vote per key position over ciphertexts sharing one key; ties go to 0.
KeyEstimate xor_recover_biased(std::span<const BitString> ciphertexts,
                               const PlaintextModel& model);

}  // namespace qsdc
