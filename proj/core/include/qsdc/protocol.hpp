#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qsdc/bit_string.hpp"
#include "qsdc/qubit.hpp"
#include "qsdc/random.hpp"

namespace qsdc {

// Result of mixing one or more groups of qubits into a base sequence.
// group_positions[g] lists, in ascending order, where group g landed; the
// base qubits fill the remaining slots in their original order.
struct Interleaving {
  std::vector<QubitState> qubits;
  std::vector<std::vector<std::size_t>> group_positions;
};

// Every arrangement of the groups among the base qubits is equally likely.
Interleaving interleave(std::span<const QubitState> base,
                        std::span<const std::vector<QubitState>> groups, RandomSource& rng);

std::vector<QubitState> extract(std::span<const QubitState> qubits,
                                std::span<const std::size_t> positions);

// Ascending indices in [0, total) not present in any of the given sets.
std::vector<std::size_t> complement_positions(
    std::size_t total, std::span<const std::vector<std::size_t>> taken);

// S_C' with the identity block S_IDB recorded by position.
struct InterleavedSequence {
  std::vector<QubitState> qubits;
  std::vector<std::size_t> identity_positions;

  std::vector<std::size_t> message_positions() const;
  std::vector<QubitState> identity_qubits() const;
  std::vector<QubitState> message_qubits() const;
};

enum class Verdict { accept, reject };

std::string_view to_string(Verdict v) noexcept;

struct VerificationPolicy {
  // Largest mismatch fraction still accepted (inclusive).
  double error_threshold = 0.02;

  void validate() const;
};

struct Verification {
  Verdict verdict = Verdict::reject;
  double mismatch_rate = 0.0;
  std::size_t mismatches = 0;
  std::size_t received = 0;
  std::string diagnostic;
};

// Bob's Step-3/4 output. announcement has one bit per received photon, in
// position order; received_mask has one entry per identity position.
struct IdentityResponse {
  BitString announcement;
  std::vector<bool> received_mask;
};

// Full transcript of one run of the original protocol.
struct SessionRecord {
  InterleavedSequence sent;
  BitString ciphertext;
  BitString alice_expected;
  BitString bob_announcement;
  std::vector<bool> received_mask;
  double mismatch_rate = 0.0;
  Verdict alice_verdict = Verdict::reject;
  std::string diagnostic;
  // Ciphertext as measured by the receiver after Alice announces the S_C
  // bases; lost photons read as 0 and are listed in message_erasures.
  std::optional<BitString> received_ciphertext;
  std::vector<std::size_t> message_erasures;
  std::optional<BitString> decrypted_message;
};

// What the party answering Alice knows. Honest Bob holds ID_B and ID_A; an
// impostor holds a guess for ID_B and no key.
struct ReceiverKnowledge {
  BitString id_b;
  std::optional<BitString> decryption_key;
};

// c_i = m_i XOR k_i. Throws ConfigError on length mismatch.
BitString xor_crypt(const BitString& data, const BitString& key);

// Alice's Steps 1-2 (after encryption): S_C from the ciphertext, S_IDB from
// ID_B, S_IDB inserted at uniformly random positions.
InterleavedSequence build_sequences(const BitString& ciphertext, const BitString& id_b,
                                    RandomSource& rng);

// Receiver's Steps 3-4: each identity photon crosses the channel, survivors
// are measured in the basis named by id_b and announced without basis.
IdentityResponse bob_process_identity(std::span<const QubitState> sequence,
                                      std::span<const std::size_t> positions,
                                      const BitString& id_b, const ChannelConfig& channel,
                                      RandomSource& rng);

// Alice's Step-4 check. expected holds one bit per identity qubit; the
// mismatch rate is taken over received positions only.
Verification alice_verify(const BitString& announcement, const BitString& expected,
                          const std::vector<bool>& received_mask,
                          const VerificationPolicy& policy);

// Steps 1-6 with honest Alice and honest Bob.
SessionRecord run_session(const BitString& message, const BitString& id_a, const BitString& id_b,
                          const ChannelConfig& channel, const VerificationPolicy& policy,
                          RandomSource& rng);

// Steps 1-6 with honest Alice and an arbitrary receiver.
SessionRecord run_session_against(const BitString& message, const BitString& id_a,
                                  const BitString& id_b, const ReceiverKnowledge& receiver,
                                  const ChannelConfig& channel, const VerificationPolicy& policy,
                                  RandomSource& rng);

}  // namespace qsdc
