#include "qsdc/protocol.hpp"

#include <algorithm>
#include <numeric>

#include "qsdc/errors.hpp"

namespace qsdc {

Interleaving interleave(std::span<const QubitState> base,
                        std::span<const std::vector<QubitState>> groups, RandomSource& rng) {
  // Slot labels: -1 for base, g for group g. A uniform shuffle of the label
  // multiset makes every arrangement equally likely.
  std::vector<int> labels(base.size(), -1);
  for (std::size_t g = 0; g < groups.size(); ++g)
    labels.insert(labels.end(), groups[g].size(), static_cast<int>(g));
  for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[rng.below(i)]);

  Interleaving out;
  out.qubits.reserve(labels.size());
  out.group_positions.resize(groups.size());
  std::size_t next_base = 0;
  std::vector<std::size_t> next_in_group(groups.size(), 0);
  for (std::size_t pos = 0; pos < labels.size(); ++pos) {
    if (labels[pos] < 0) {
      out.qubits.push_back(base[next_base++]);
    } else {
      const auto g = static_cast<std::size_t>(labels[pos]);
      out.qubits.push_back(groups[g][next_in_group[g]++]);
      out.group_positions[g].push_back(pos);
    }
  }
  return out;
}

std::vector<QubitState> extract(std::span<const QubitState> qubits,
                                std::span<const std::size_t> positions) {
  std::vector<QubitState> out;
  out.reserve(positions.size());
  for (std::size_t p : positions) {
    if (p >= qubits.size()) throw ProtocolError("extract: position out of range");
    out.push_back(qubits[p]);
  }
  return out;
}

std::vector<std::size_t> complement_positions(
    std::size_t total, std::span<const std::vector<std::size_t>> taken) {
  std::vector<bool> used(total, false);
  for (const auto& set : taken)
    for (std::size_t p : set) {
      if (p >= total) throw ProtocolError("complement_positions: position out of range");
      used[p] = true;
    }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < total; ++i)
    if (!used[i]) out.push_back(i);
  return out;
}

std::vector<std::size_t> InterleavedSequence::message_positions() const {
  const std::vector<std::size_t> sets[] = {identity_positions};
  return complement_positions(qubits.size(), sets);
}

std::vector<QubitState> InterleavedSequence::identity_qubits() const {
  return extract(qubits, identity_positions);
}

std::vector<QubitState> InterleavedSequence::message_qubits() const {
  return extract(qubits, message_positions());
}

std::string_view to_string(Verdict v) noexcept {
  return v == Verdict::accept ? "accept" : "reject";
}

void VerificationPolicy::validate() const {
  if (!(error_threshold >= 0.0 && error_threshold <= 1.0))
    throw ConfigError("verification policy: error_threshold must lie in [0,1]");
}

BitString xor_crypt(const BitString& data, const BitString& key) {
  if (data.size() != key.size())
    throw ConfigError("xor_crypt: data has " + std::to_string(data.size()) + " bits, key has " +
                      std::to_string(key.size()));
  std::vector<std::uint8_t> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = data[i] ^ key[i];
  return BitString(std::move(out));
}

InterleavedSequence build_sequences(const BitString& ciphertext, const BitString& id_b,
                                    RandomSource& rng) {
  std::vector<QubitState> s_c;
  s_c.reserve(ciphertext.size());
  for (auto bit : ciphertext) s_c.push_back(prepare_message_qubit(bit, rng));

  std::vector<std::vector<QubitState>> groups(1);
  groups[0].reserve(id_b.size());
  for (auto bit : id_b) groups[0].push_back(prepare_identity_qubit(bit, rng));

  auto mixed = interleave(s_c, groups, rng);
  return {std::move(mixed.qubits), std::move(mixed.group_positions[0])};
}

IdentityResponse bob_process_identity(std::span<const QubitState> sequence,
                                      std::span<const std::size_t> positions,
                                      const BitString& id_b, const ChannelConfig& channel,
                                      RandomSource& rng) {
  if (positions.size() != id_b.size())
    throw ProtocolError("bob_process_identity: " + std::to_string(positions.size()) +
                        " positions announced for an identity of " +
                        std::to_string(id_b.size()) + " bits");
  IdentityResponse out;
  out.received_mask.reserve(positions.size());
  for (std::size_t j = 0; j < positions.size(); ++j) {
    if (positions[j] >= sequence.size())
      throw ProtocolError("bob_process_identity: announced position out of range");
    const auto arrived = transmit(sequence[positions[j]], channel, rng);
    out.received_mask.push_back(arrived.has_value());
    if (!arrived) continue;
    const auto m = measure(*arrived, basis_for_bit(id_b[j]), rng);
    out.announcement.push_back(announce_encoding(m.collapsed));
  }
  return out;
}

Verification alice_verify(const BitString& announcement, const BitString& expected,
                          const std::vector<bool>& received_mask,
                          const VerificationPolicy& policy) {
  if (received_mask.size() != expected.size())
    throw ProtocolError("alice_verify: received mask does not cover the identity block");
  const auto received =
      static_cast<std::size_t>(std::count(received_mask.begin(), received_mask.end(), true));
  if (announcement.size() != received)
    throw ProtocolError("alice_verify: announcement length differs from received count");

  Verification v;
  v.received = received;
  if (received == 0) {
    v.verdict = Verdict::reject;
    v.diagnostic = "no identity photons received; no evidence of legitimacy";
    return v;
  }
  std::size_t a = 0;
  for (std::size_t j = 0; j < expected.size(); ++j) {
    if (!received_mask[j]) continue;
    v.mismatches += (announcement[a++] != expected[j]);
  }
  v.mismatch_rate = static_cast<double>(v.mismatches) / static_cast<double>(received);
  v.verdict = v.mismatch_rate <= policy.error_threshold ? Verdict::accept : Verdict::reject;
  return v;
}

SessionRecord run_session(const BitString& message, const BitString& id_a, const BitString& id_b,
                          const ChannelConfig& channel, const VerificationPolicy& policy,
                          RandomSource& rng) {
  return run_session_against(message, id_a, id_b, ReceiverKnowledge{id_b, id_a}, channel, policy,
                             rng);
}

SessionRecord run_session_against(const BitString& message, const BitString& id_a,
                                  const BitString& id_b, const ReceiverKnowledge& receiver,
                                  const ChannelConfig& channel, const VerificationPolicy& policy,
                                  RandomSource& rng) {
  channel.validate();
  policy.validate();
  if (message.size() != id_a.size())
    throw ConfigError("run_session: message and ID_A lengths differ");
  if (receiver.id_b.size() != id_b.size())
    throw ConfigError("run_session: receiver identity length differs from ID_B");
  if (receiver.decryption_key && receiver.decryption_key->size() != message.size())
    throw ConfigError("run_session: receiver key length differs from message length");

  SessionRecord rec;
  rec.ciphertext = xor_crypt(message, id_a);
  rec.sent = build_sequences(rec.ciphertext, id_b, rng);
  for (auto q : rec.sent.identity_qubits()) rec.alice_expected.push_back(announce_encoding(q));

  auto response =
      bob_process_identity(rec.sent.qubits, rec.sent.identity_positions, receiver.id_b, channel, rng);
  rec.bob_announcement = std::move(response.announcement);
  rec.received_mask = std::move(response.received_mask);

  const auto v = alice_verify(rec.bob_announcement, rec.alice_expected, rec.received_mask, policy);
  rec.mismatch_rate = v.mismatch_rate;
  rec.alice_verdict = v.verdict;
  rec.diagnostic = v.diagnostic;
  if (v.verdict == Verdict::reject) return rec;

  // Step 5: Alice announces the S_C bases; the receiver measures in them.
  const auto positions = rec.sent.message_positions();
  BitString c_received;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const QubitState sent = rec.sent.qubits[positions[i]];
    const auto arrived = transmit(sent, channel, rng);
    if (!arrived) {
      rec.message_erasures.push_back(i);
      c_received.push_back(0);
      continue;
    }
    c_received.push_back(measure(*arrived, basis_of(sent), rng).outcome);
  }
  rec.received_ciphertext = c_received;
  if (receiver.decryption_key) rec.decrypted_message = xor_crypt(c_received, *receiver.decryption_key);
  return rec;
}

}  // namespace qsdc
