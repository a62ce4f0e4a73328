#include "qsdc/attack.hpp"

#include <cmath>

#include "qsdc/errors.hpp"

namespace qsdc {

void FlipPolicy::validate() const {
  if (!(mismatch_fraction >= 0.0 && mismatch_fraction < 1.0))
    throw ConfigError("flip policy: mismatch_fraction must lie in [0,1)");
  if (kind == FlipPolicyKind::majority && min_observations == 0)
    throw ConfigError("flip policy: min_observations must be positive");
}

void PlaintextModel::validate() const {
  if (kind == PlaintextModelKind::biased_bits && !(bias > 0.5 && bias <= 1.0))
    throw ConfigError("plaintext model: bias must lie in (0.5, 1]");
}

AttackState AttackState::fresh(BitString candidate) {
  AttackState s;
  const std::size_t u = candidate.size();
  s.candidate = std::move(candidate);
  s.match_count.assign(u, 0);
  s.ever_flipped.assign(u, false);
  s.observations.assign(u, 0);
  s.mismatches.assign(u, 0);
  return s;
}

std::vector<QubitState> oscar_prepare(const BitString& candidate) {
  std::vector<QubitState> out;
  out.reserve(candidate.size());
  for (auto bit : candidate) out.push_back(bit ? QubitState::X1 : QubitState::Z0);
  return out;
}

void update_candidate(AttackState& state, std::span<const QubitState> sent,
                      const BitString& announcement, const std::vector<bool>& received_mask,
                      const FlipPolicy& policy, IterationLog* log) {
  if (sent.size() != state.candidate.size() || received_mask.size() != sent.size())
    throw ProtocolError("update_candidate: probe does not match candidate length");
  std::size_t a = 0;
  for (std::size_t i = 0; i < sent.size(); ++i) {
    if (!received_mask[i]) continue;
    if (a >= announcement.size()) throw ProtocolError("update_candidate: announcement too short");
    const std::uint8_t announced = announcement[a++];
    ++state.bits_observed;
    const bool mismatch = announced != announce_encoding(sent[i]);
    ++state.observations[i];
    state.mismatches[i] += mismatch;

    bool flip = false;
    if (mismatch) {
      if (policy.kind == FlipPolicyKind::first_mismatch) {
        flip = true;
      } else {
        flip = state.observations[i] >= policy.min_observations &&
               static_cast<double>(state.mismatches[i]) >
                   policy.mismatch_fraction * static_cast<double>(state.observations[i]);
      }
    }

    if (flip) {
      state.candidate.flip(i);
      state.ever_flipped[i] = true;
      state.observations[i] = 0;
      state.mismatches[i] = 0;
      ++state.total_flips;
    }
    state.match_count[i] = mismatch ? 0 : state.match_count[i] + 1;
    if (mismatch && log) log->push_back({state.iterations_run + 1, i, sent[i], announced, flip});
  }
  if (a != announcement.size()) throw ProtocolError("update_candidate: announcement too long");
}

AttackState scene1_iteration(AttackState state, const BitString& true_id_b,
                             const ChannelConfig& channel, RandomSource& rng,
                             const Scene1Options& options, IterationLog* log) {
  const std::size_t u = state.candidate.size();
  if (true_id_b.size() != u) throw ConfigError("scene1_iteration: candidate and ID_B lengths differ");

  const auto probe = oscar_prepare(state.candidate);
  const std::size_t decoys = options.decoy_length ? options.decoy_length : u;
  std::vector<QubitState> s_c;
  s_c.reserve(decoys);
  for (std::size_t i = 0; i < decoys; ++i)
    s_c.push_back(make_state(rng.coin() ? Basis::X : Basis::Z, rng.coin()));

  const std::vector<QubitState> groups[] = {probe};
  const auto mixed = interleave(s_c, groups, rng);

  // Honest Bob answers the fake session exactly as in Steps 3-4.
  const auto response =
      bob_process_identity(mixed.qubits, mixed.group_positions[0], true_id_b, channel, rng);
  update_candidate(state, probe, response.announcement, response.received_mask,
                   options.flip_policy, log);
  ++state.iterations_run;
  return state;
}

ConfidenceReport confidence_report(const AttackState& state) {
  ConfidenceReport r;
  r.overall_confidence = 1.0;
  r.per_bit_confidence.reserve(state.candidate.size());
  for (std::size_t i = 0; i < state.candidate.size(); ++i) {
    if (state.ever_flipped[i]) {
      r.per_bit_confidence.push_back(1.0);
      continue;
    }
    const double c = -std::expm1(-static_cast<double>(state.match_count[i]) * std::log(2.0));
    r.per_bit_confidence.push_back(c);
    r.overall_confidence *= c;
    ++r.unconfirmed_count;
  }
  return r;
}

Scene1Result scene1_run(std::size_t u, std::size_t k, const BitString& true_id_b,
                        const BitString& initial, const ChannelConfig& channel,
                        RandomSource& rng, const Scene1Options& options, IterationLog* log) {
  if (true_id_b.size() != u || initial.size() != u)
    throw ConfigError("scene1_run: ID_B and initial candidate must both have length u");
  channel.validate();
  options.flip_policy.validate();
  AttackState state = AttackState::fresh(initial);
  for (std::size_t it = 0; it < k; ++it)
    state = scene1_iteration(std::move(state), true_id_b, channel, rng, options, log);
  auto report = confidence_report(state);
  return {std::move(state), std::move(report)};
}

Scene2Result scene2_intercept(const BitString& message, const BitString& id_a,
                              const BitString& true_id_b, const BitString& oscar_id_b,
                              const ChannelConfig& channel, const VerificationPolicy& policy,
                              RandomSource& rng) {
  const auto rec = run_session_against(message, id_a, true_id_b,
                                       ReceiverKnowledge{oscar_id_b, std::nullopt}, channel,
                                       policy, rng);
  return {rec.alice_verdict, rec.mismatch_rate, rec.received_ciphertext, rec.message_erasures};
}

BitString xor_recover_known_plaintext(const BitString& ciphertext, const BitString& plaintext) {
  return xor_crypt(ciphertext, plaintext);
}

KeyEstimate xor_recover_biased(std::span<const BitString> ciphertexts,
                               const PlaintextModel& model) {
  if (model.kind != PlaintextModelKind::biased_bits)
    throw ConfigError("xor_recover_biased: model must be biased_bits");
  model.validate();
  if (ciphertexts.empty()) throw ConfigError("xor_recover_biased: no ciphertexts");
  const std::size_t n = ciphertexts.front().size();
  for (const auto& c : ciphertexts)
    if (c.size() != n) throw ConfigError("xor_recover_biased: ciphertext lengths differ");

  // Plaintext bits lean to 0, so each ciphertext bit equals the key bit with
  // probability bias.
  KeyEstimate out{BitString(n), std::vector<double>(n, 0.0)};
  const auto total = static_cast<double>(ciphertexts.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t ones = 0;
    for (const auto& c : ciphertexts) ones += c[i];
    const std::size_t zeros = ciphertexts.size() - ones;
    const std::uint8_t bit = ones > zeros ? 1 : 0;
    out.key_estimate.set(i, bit);
    out.per_bit_majority[i] = static_cast<double>(bit ? ones : zeros) / total;
  }
  return out;
}

}  // namespace qsdc
