#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qsdc/attack.hpp"
#include "qsdc/bit_string.hpp"
#include "qsdc/protocol.hpp"
#include "qsdc/qubit.hpp"
#include "qsdc/random.hpp"

namespace qsdc {

// Pre-shared secrets of the mutually authenticated protocol. ID_A has even
// length 2*ell; an empty ID_A disables Alice's authentication entirely.
struct MutualSecrets {
  BitString id_a;
  BitString id_b;
  BitString k_ab;

  std::size_t ell() const noexcept { return id_a.size() / 2; }
  void validate() const;

  static MutualSecrets random(std::size_t ell, std::size_t u, std::size_t n, RandomSource& rng);
};

// Which ID_A bits act as bases and which as values. Pair j uses
// id_a[basis_indices[j]] as basis (0 -> B_Z, 1 -> B_X) and
// id_a[value_indices[j]] as the encoded value. Indices are 0-based.
struct AuthPairing {
  std::vector<std::size_t> basis_indices;
  std::vector<std::size_t> value_indices;

  std::size_t size() const noexcept { return basis_indices.size(); }
  // Throws ConfigError unless both lists have equal length and all indices
  // are distinct and below id_a_length.
  void validate(std::size_t id_a_length) const;

  friend bool operator==(const AuthPairing&, const AuthPairing&) = default;
};

// S_IDA with the pairing that produced it.
struct AliceAuthBlock {
  AuthPairing pairing;
  std::vector<QubitState> qubits;
};

// Uniform ell-subset of [0, 2*ell) as basis indices in random order; the
// rest, ascending, as value indices.
AuthPairing random_pairing(std::size_t id_a_length, RandomSource& rng);

AliceAuthBlock build_sida(const BitString& id_a, RandomSource& rng);
AliceAuthBlock build_sida(const BitString& id_a, const AuthPairing& pairing);

struct AliceCheck {
  Verification verification;
  std::vector<bool> received_mask;
};

// Bob's Step 4. The block crosses the channel; Bob measures pair j in the
// basis given by his own copy of ID_A and compares with the value bit.
AliceCheck bob_verify_alice(std::span<const QubitState> block, const AuthPairing& announced,
                            const BitString& id_a, const VerificationPolicy& policy,
                            const ChannelConfig& channel, RandomSource& rng);

// Public transcript plus verdicts of a modified session. Quantum states and
// secret bits are deliberately absent: everything here is either announced
// on the classical channel or a party's local verdict.
struct ModifiedSessionRecord {
  std::size_t sequence_length = 0;
  std::vector<std::size_t> sida_positions;
  std::vector<std::size_t> sidb_positions;
  AuthPairing announced_pairing;
  std::vector<bool> sida_received_mask;
  // Absent when the receiver does not check Alice (impostor receiver or ell = 0).
  std::optional<Verdict> bob_verdict;
  double bob_mismatch_rate = 0.0;
  // Absent when Bob aborted at Step 4.
  std::optional<BitString> bob_announcement;
  std::vector<bool> sidb_received_mask;
  std::optional<Verdict> alice_verdict;
  double alice_mismatch_rate = 0.0;
  // Bases of S_C announced by Alice at Step 5 (absent unless she accepted).
  std::optional<std::vector<Basis>> sc_bases;
  std::optional<BitString> received_ciphertext;
  std::vector<std::size_t> message_erasures;
  std::optional<BitString> decrypted_message;
  std::string diagnostic;
};

// Receiver-side knowledge for the modified protocol.
struct ModifiedReceiver {
  BitString id_b;
  std::optional<BitString> id_a;
  std::optional<BitString> k_ab;
};

struct ModifiedOptions {
  // Pairing to use instead of a fresh random one (retransmissions).
  std::optional<AuthPairing> pairing;
};

// Honest Alice, honest Bob.
ModifiedSessionRecord run_modified_session(const BitString& message, const MutualSecrets& secrets,
                                           const ChannelConfig& channel,
                                           const VerificationPolicy& policy, RandomSource& rng,
                                           const ModifiedOptions& options = {});

// Honest Alice, arbitrary receiver.
ModifiedSessionRecord run_modified_session_against(const BitString& message,
                                                   const MutualSecrets& secrets,
                                                   const ModifiedReceiver& receiver,
                                                   const ChannelConfig& channel,
                                                   const VerificationPolicy& policy,
                                                   RandomSource& rng,
                                                   const ModifiedOptions& options = {});

// Oscar impersonates Alice against honest Bob: random S_IDA states and a
// random pairing announcement, the probe for candidate_id_b, random decoys.
ModifiedSessionRecord oscar_as_alice_session(const MutualSecrets& bob_secrets,
                                             const BitString& candidate_id_b,
                                             std::size_t decoy_length,
                                             const ChannelConfig& channel,
                                             const VerificationPolicy& policy, RandomSource& rng);

struct ModifiedAttackStats {
  std::size_t sessions = 0;
  std::size_t aborts = 0;
  double abort_rate = 0.0;
  // S_IDB announcement bits Oscar received across all sessions.
  std::size_t bits_learned = 0;
  // Sessions Bob aborted that still carried an S_IDB announcement (must be 0).
  std::size_t leaks_after_abort = 0;
  AttackState final_state;
};

// Scene 1 run against the modified protocol for k fake sessions.
ModifiedAttackStats scene1_attack_modified(std::size_t u, std::size_t k,
                                           const MutualSecrets& secrets,
                                           const BitString& initial,
                                           const ChannelConfig& channel,
                                           const VerificationPolicy& policy, RandomSource& rng,
                                           const Scene1Options& options = {});

// Uniformly random permutation of [0, n) without fixed points; n >= 2.
std::vector<std::size_t> random_derangement(std::size_t n, RandomSource& rng);

// Loss bookkeeping for verification qubits across retransmissions. A value
// index lost once must be re-sent with a different basis index; one lost
// twice is discarded for good.
class RetransmissionLedger {
 public:
  void record(const AuthPairing& sent, const std::vector<bool>& received_mask);

  std::size_t losses(std::size_t value_index) const;
  bool discarded(std::size_t value_index) const { return losses(value_index) >= 2; }
  // Basis index paired with value_index when it was last lost.
  std::optional<std::size_t> basis_at_loss(std::size_t value_index) const;

  // Pairing for the retry. Discarded pairs are dropped. With derange, the
  // surviving basis indices are re-paired by a uniform derangement;
  // otherwise only pairs that lost a photon are re-paired. A lost-once pair
  // that cannot receive a new basis index is dropped.
  AuthPairing next_pairing(const AuthPairing& previous, RandomSource& rng, bool derange) const;

  // True when next satisfies the retransmission rule relative to the ledger.
  bool satisfies_rule(const AuthPairing& next) const;

 private:
  std::map<std::size_t, std::size_t> losses_;
  std::map<std::size_t, std::size_t> basis_at_loss_;
};

}  // namespace qsdc
