#include "qsdc/modified_protocol.hpp"

#include <algorithm>
#include <numeric>

#include "qsdc/errors.hpp"

namespace qsdc {
namespace {

std::vector<QubitState> random_states(std::size_t count, RandomSource& rng) {
  std::vector<QubitState> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(make_state(rng.coin() ? Basis::X : Basis::Z, rng.coin()));
  return out;
}

// Receiver side of Steps 5-6: measure S_C in the announced bases, then decrypt.
void measure_message_block(ModifiedSessionRecord& rec, std::span<const QubitState> s_c,
                           const std::optional<BitString>& key, const ChannelConfig& channel,
                           RandomSource& rng) {
  std::vector<Basis> bases;
  bases.reserve(s_c.size());
  BitString c_received;
  for (std::size_t i = 0; i < s_c.size(); ++i) {
    bases.push_back(basis_of(s_c[i]));
    const auto arrived = transmit(s_c[i], channel, rng);
    if (!arrived) {
      rec.message_erasures.push_back(i);
      c_received.push_back(0);
      continue;
    }
    c_received.push_back(measure(*arrived, bases.back(), rng).outcome);
  }
  rec.sc_bases = std::move(bases);
  rec.received_ciphertext = c_received;
  if (key) rec.decrypted_message = xor_crypt(c_received, *key);
}

}  // namespace

void MutualSecrets::validate() const {
  if (id_a.size() % 2 != 0) throw ConfigError("mutual secrets: ID_A length must be even (2*ell)");
}

MutualSecrets MutualSecrets::random(std::size_t ell, std::size_t u, std::size_t n,
                                    RandomSource& rng) {
  MutualSecrets s;
  s.id_a = BitString::random(2 * ell, rng);
  s.id_b = BitString::random(u, rng);
  s.k_ab = BitString::random(n, rng);
  return s;
}

void AuthPairing::validate(std::size_t id_a_length) const {
  if (basis_indices.size() != value_indices.size())
    throw ConfigError("auth pairing: basis and value lists differ in length");
  std::vector<bool> seen(id_a_length, false);
  auto check = [&](std::size_t idx) {
    if (idx >= id_a_length) throw ConfigError("auth pairing: index outside ID_A");
    if (seen[idx]) throw ConfigError("auth pairing: index used twice");
    seen[idx] = true;
  };
  for (auto i : basis_indices) check(i);
  for (auto i : value_indices) check(i);
}

AuthPairing random_pairing(std::size_t id_a_length, RandomSource& rng) {
  if (id_a_length < 2 || id_a_length % 2 != 0)
    throw ConfigError("random_pairing: ID_A length must be even and at least 2");
  const std::size_t ell = id_a_length / 2;
  std::vector<std::size_t> idx(id_a_length);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < ell; ++i) std::swap(idx[i], idx[i + rng.below(id_a_length - i)]);
  AuthPairing p;
  p.basis_indices.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(ell));
  p.value_indices.assign(idx.begin() + static_cast<std::ptrdiff_t>(ell), idx.end());
  std::sort(p.value_indices.begin(), p.value_indices.end());
  return p;
}

AliceAuthBlock build_sida(const BitString& id_a, RandomSource& rng) {
  if (id_a.size() % 2 != 0 || id_a.size() < 2)
    throw ConfigError("build_sida: ID_A length must be even and at least 2");
  return build_sida(id_a, random_pairing(id_a.size(), rng));
}

AliceAuthBlock build_sida(const BitString& id_a, const AuthPairing& pairing) {
  pairing.validate(id_a.size());
  AliceAuthBlock block{pairing, {}};
  block.qubits.reserve(pairing.size());
  for (std::size_t j = 0; j < pairing.size(); ++j)
    block.qubits.push_back(make_state(basis_for_bit(id_a[pairing.basis_indices[j]]),
                                      id_a[pairing.value_indices[j]]));
  return block;
}

AliceCheck bob_verify_alice(std::span<const QubitState> block, const AuthPairing& announced,
                            const BitString& id_a, const VerificationPolicy& policy,
                            const ChannelConfig& channel, RandomSource& rng) {
  try {
    announced.validate(id_a.size());
  } catch (const ConfigError& e) {
    throw ProtocolError(std::string("bob_verify_alice: bad announcement: ") + e.what());
  }
  if (block.size() != announced.size())
    throw ProtocolError("bob_verify_alice: block size differs from announced pairing");

  AliceCheck out;
  auto& v = out.verification;
  for (std::size_t j = 0; j < block.size(); ++j) {
    const auto arrived = transmit(block[j], channel, rng);
    out.received_mask.push_back(arrived.has_value());
    if (!arrived) continue;
    const auto m = measure(*arrived, basis_for_bit(id_a[announced.basis_indices[j]]), rng);
    ++v.received;
    v.mismatches += (m.outcome != id_a[announced.value_indices[j]]);
  }
  if (v.received == 0) {
    v.verdict = Verdict::reject;
    v.diagnostic = "no verification photons received; Alice not authenticated";
    return out;
  }
  v.mismatch_rate = static_cast<double>(v.mismatches) / static_cast<double>(v.received);
  v.verdict = v.mismatch_rate <= policy.error_threshold ? Verdict::accept : Verdict::reject;
  return out;
}

ModifiedSessionRecord run_modified_session(const BitString& message, const MutualSecrets& secrets,
                                           const ChannelConfig& channel,
                                           const VerificationPolicy& policy, RandomSource& rng,
                                           const ModifiedOptions& options) {
  return run_modified_session_against(message, secrets,
                                      ModifiedReceiver{secrets.id_b, secrets.id_a, secrets.k_ab},
                                      channel, policy, rng, options);
}

ModifiedSessionRecord run_modified_session_against(const BitString& message,
                                                   const MutualSecrets& secrets,
                                                   const ModifiedReceiver& receiver,
                                                   const ChannelConfig& channel,
                                                   const VerificationPolicy& policy,
                                                   RandomSource& rng,
                                                   const ModifiedOptions& options) {
  channel.validate();
  policy.validate();
  secrets.validate();
  if (message.size() != secrets.k_ab.size())
    throw ConfigError("run_modified_session: message and K_AB lengths differ");
  if (receiver.id_b.size() != secrets.id_b.size())
    throw ConfigError("run_modified_session: receiver identity length differs from ID_B");
  if (receiver.id_a && receiver.id_a->size() != secrets.id_a.size())
    throw ConfigError("run_modified_session: receiver ID_A length differs");
  if (receiver.k_ab && receiver.k_ab->size() != message.size())
    throw ConfigError("run_modified_session: receiver key length differs");

  // Steps 1-2.
  const BitString ciphertext = xor_crypt(message, secrets.k_ab);
  std::vector<QubitState> s_c;
  s_c.reserve(ciphertext.size());
  for (auto bit : ciphertext) s_c.push_back(prepare_message_qubit(bit, rng));
  std::vector<QubitState> s_idb;
  s_idb.reserve(secrets.id_b.size());
  for (auto bit : secrets.id_b) s_idb.push_back(prepare_identity_qubit(bit, rng));

  AliceAuthBlock block;
  if (secrets.ell() > 0)
    block = options.pairing ? build_sida(secrets.id_a, *options.pairing)
                            : build_sida(secrets.id_a, rng);

  const std::vector<QubitState> groups[] = {s_idb, block.qubits};
  const auto mixed = interleave(s_c, groups, rng);

  // Step 3: positions of both blocks and the pairing, never the bit values.
  ModifiedSessionRecord rec;
  rec.sequence_length = mixed.qubits.size();
  rec.sidb_positions = mixed.group_positions[0];
  rec.sida_positions = mixed.group_positions[1];
  rec.announced_pairing = block.pairing;

  // Step 4: Bob authenticates Alice before revealing anything about S_IDB.
  if (receiver.id_a && secrets.ell() > 0) {
    const auto check = bob_verify_alice(extract(mixed.qubits, rec.sida_positions),
                                        rec.announced_pairing, *receiver.id_a, policy, channel, rng);
    rec.bob_verdict = check.verification.verdict;
    rec.bob_mismatch_rate = check.verification.mismatch_rate;
    rec.sida_received_mask = check.received_mask;
    if (check.verification.verdict == Verdict::reject) {
      rec.diagnostic = check.verification.diagnostic.empty()
                           ? "Bob aborted: Alice failed authentication"
                           : check.verification.diagnostic;
      return rec;
    }
  }

  auto response =
      bob_process_identity(mixed.qubits, rec.sidb_positions, receiver.id_b, channel, rng);
  BitString expected;
  for (auto q : s_idb) expected.push_back(announce_encoding(q));
  rec.bob_announcement = response.announcement;
  rec.sidb_received_mask = response.received_mask;

  // Step 5.
  const auto v = alice_verify(*rec.bob_announcement, expected, rec.sidb_received_mask, policy);
  rec.alice_verdict = v.verdict;
  rec.alice_mismatch_rate = v.mismatch_rate;
  if (v.verdict == Verdict::reject) {
    rec.diagnostic = v.diagnostic.empty() ? "Alice aborted: Bob failed authentication" : v.diagnostic;
    return rec;
  }

  // Steps 5-6.
  measure_message_block(rec, s_c, receiver.k_ab, channel, rng);
  return rec;
}

ModifiedSessionRecord oscar_as_alice_session(const MutualSecrets& bob_secrets,
                                             const BitString& candidate_id_b,
                                             std::size_t decoy_length,
                                             const ChannelConfig& channel,
                                             const VerificationPolicy& policy, RandomSource& rng) {
  bob_secrets.validate();
  if (candidate_id_b.size() != bob_secrets.id_b.size())
    throw ConfigError("oscar_as_alice_session: candidate length differs from ID_B");
  const std::size_t ell = bob_secrets.ell();

  // Without ID_A Oscar can only send random states and announce a random pairing.
  const auto decoys = random_states(decoy_length ? decoy_length : candidate_id_b.size(), rng);
  const auto probe = oscar_prepare(candidate_id_b);
  const auto fake_sida = random_states(ell, rng);
  AuthPairing fake_pairing;
  if (ell > 0) fake_pairing = random_pairing(2 * ell, rng);

  const std::vector<QubitState> groups[] = {probe, fake_sida};
  const auto mixed = interleave(decoys, groups, rng);

  ModifiedSessionRecord rec;
  rec.sequence_length = mixed.qubits.size();
  rec.sidb_positions = mixed.group_positions[0];
  rec.sida_positions = mixed.group_positions[1];
  rec.announced_pairing = fake_pairing;

  if (ell > 0) {
    const auto check = bob_verify_alice(extract(mixed.qubits, rec.sida_positions), fake_pairing,
                                        bob_secrets.id_a, policy, channel, rng);
    rec.bob_verdict = check.verification.verdict;
    rec.bob_mismatch_rate = check.verification.mismatch_rate;
    rec.sida_received_mask = check.received_mask;
    if (check.verification.verdict == Verdict::reject) {
      rec.diagnostic = "Bob aborted: Alice failed authentication";
      return rec;
    }
  }

  const auto response =
      bob_process_identity(mixed.qubits, rec.sidb_positions, bob_secrets.id_b, channel, rng);
  rec.bob_announcement = response.announcement;
  rec.sidb_received_mask = response.received_mask;
  return rec;
}

ModifiedAttackStats scene1_attack_modified(std::size_t u, std::size_t k,
                                           const MutualSecrets& secrets,
                                           const BitString& initial,
                                           const ChannelConfig& channel,
                                           const VerificationPolicy& policy, RandomSource& rng,
                                           const Scene1Options& options) {
  if (secrets.id_b.size() != u || initial.size() != u)
    throw ConfigError("scene1_attack_modified: ID_B and initial candidate must have length u");
  options.flip_policy.validate();

  ModifiedAttackStats stats;
  stats.final_state = AttackState::fresh(initial);
  auto& state = stats.final_state;
  for (std::size_t it = 0; it < k; ++it) {
    const auto probe = oscar_prepare(state.candidate);
    const auto rec =
        oscar_as_alice_session(secrets, state.candidate, options.decoy_length, channel, policy, rng);
    ++stats.sessions;
    const bool aborted = rec.bob_verdict == Verdict::reject;
    if (aborted) {
      ++stats.aborts;
      if (rec.bob_announcement) ++stats.leaks_after_abort;
    }
    if (rec.bob_announcement) {
      stats.bits_learned += rec.bob_announcement->size();
      update_candidate(state, probe, *rec.bob_announcement, rec.sidb_received_mask,
                       options.flip_policy);
    }
    ++state.iterations_run;
  }
  stats.abort_rate =
      stats.sessions ? static_cast<double>(stats.aborts) / static_cast<double>(stats.sessions) : 0.0;
  return stats;
}

std::vector<std::size_t> random_derangement(std::size_t n, RandomSource& rng) {
  if (n < 2) throw ConfigError("random_derangement: needs at least two elements");
  std::vector<std::size_t> p(n);
  for (;;) {
    std::iota(p.begin(), p.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
    bool fixed = false;
    for (std::size_t i = 0; i < n && !fixed; ++i) fixed = p[i] == i;
    if (!fixed) return p;
  }
}

void RetransmissionLedger::record(const AuthPairing& sent, const std::vector<bool>& received_mask) {
  if (received_mask.size() != sent.size())
    throw ConfigError("RetransmissionLedger::record: mask does not match pairing");
  for (std::size_t j = 0; j < sent.size(); ++j) {
    if (received_mask[j]) continue;
    ++losses_[sent.value_indices[j]];
    basis_at_loss_[sent.value_indices[j]] = sent.basis_indices[j];
  }
}

std::size_t RetransmissionLedger::losses(std::size_t value_index) const {
  const auto it = losses_.find(value_index);
  return it == losses_.end() ? 0 : it->second;
}

std::optional<std::size_t> RetransmissionLedger::basis_at_loss(std::size_t value_index) const {
  const auto it = basis_at_loss_.find(value_index);
  if (it == basis_at_loss_.end()) return std::nullopt;
  return it->second;
}

bool RetransmissionLedger::satisfies_rule(const AuthPairing& next) const {
  for (std::size_t j = 0; j < next.size(); ++j) {
    const std::size_t v = next.value_indices[j];
    if (discarded(v)) return false;
    if (losses(v) == 1 && basis_at_loss(v) == next.basis_indices[j]) return false;
  }
  return true;
}

AuthPairing RetransmissionLedger::next_pairing(const AuthPairing& previous, RandomSource& rng,
                                               bool derange) const {
  AuthPairing kept;
  for (std::size_t j = 0; j < previous.size(); ++j) {
    if (discarded(previous.value_indices[j])) continue;
    kept.basis_indices.push_back(previous.basis_indices[j]);
    kept.value_indices.push_back(previous.value_indices[j]);
  }

  auto violates = [&](const AuthPairing& p, std::size_t j) {
    const std::size_t v = p.value_indices[j];
    return losses(v) == 1 && basis_at_loss(v) == p.basis_indices[j];
  };
  auto drop_violations = [&](AuthPairing p) {
    AuthPairing out;
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (violates(p, j)) continue;
      out.basis_indices.push_back(p.basis_indices[j]);
      out.value_indices.push_back(p.value_indices[j]);
    }
    return out;
  };

  const std::size_t m = kept.size();
  if (derange) {
    if (m < 2) return drop_violations(kept);
    AuthPairing candidate = kept;
    // A derangement moves every basis index; an earlier loss can still pin a
    // value to a basis index it may not reuse, so resample a bounded number
    // of times before dropping what still violates.
    for (int attempt = 0; attempt < 64; ++attempt) {
      const auto sigma = random_derangement(m, rng);
      for (std::size_t j = 0; j < m; ++j) candidate.basis_indices[j] = kept.basis_indices[sigma[j]];
      if (satisfies_rule(candidate)) return candidate;
    }
    return drop_violations(candidate);
  }

  std::vector<std::size_t> bad;
  for (std::size_t j = 0; j < m; ++j)
    if (violates(kept, j)) bad.push_back(j);
  if (bad.size() >= 2) {
    const std::size_t first = kept.basis_indices[bad.front()];
    for (std::size_t i = 0; i + 1 < bad.size(); ++i)
      kept.basis_indices[bad[i]] = kept.basis_indices[bad[i + 1]];
    kept.basis_indices[bad.back()] = first;
  } else if (bad.size() == 1) {
    std::vector<std::size_t> partners;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == bad.front()) continue;
      AuthPairing trial = kept;
      std::swap(trial.basis_indices[j], trial.basis_indices[bad.front()]);
      if (!violates(trial, j) && !violates(trial, bad.front())) partners.push_back(j);
    }
    if (!partners.empty()) {
      const std::size_t j = partners[rng.below(partners.size())];
      std::swap(kept.basis_indices[j], kept.basis_indices[bad.front()]);
    }
  }
  return drop_violations(kept);
}

}  // namespace qsdc
