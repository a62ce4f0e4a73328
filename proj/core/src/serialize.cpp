#include "qsdc/serialize.hpp"

#include <sstream>

namespace qsdc {

using nlohmann::json;

void to_json(json& j, const BitString& bits) { j = bits.to_string(); }

void from_json(const json& j, BitString& bits) { bits = BitString::parse(j.get<std::string>()); }

void to_json(json& j, QubitState s) { j = std::string(to_string(s)); }

void to_json(json& j, Basis b) { j = std::string(to_string(b)); }

void to_json(json& j, Verdict v) { j = std::string(to_string(v)); }

void to_json(json& j, const ChannelConfig& c) {
  j = json{{"p_loss", c.p_loss}, {"p_flip", c.p_flip}};
}

void to_json(json& j, const InterleavedSequence& seq) {
  j = json{{"qubits", seq.qubits}, {"identity_positions", seq.identity_positions}};
}

namespace {

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

void to_json(json& j, const SessionRecord& r) {
  j = json{{"schema_version", kSchemaVersion},
           {"record_type", "session"},
           {"sent", r.sent},
           {"ciphertext", r.ciphertext},
           {"alice_expected", r.alice_expected},
           {"bob_announcement", r.bob_announcement},
           {"received_mask", r.received_mask},
           {"mismatch_rate", r.mismatch_rate},
           {"alice_verdict", r.alice_verdict},
           {"diagnostic", r.diagnostic},
           {"received_ciphertext", optional_json(r.received_ciphertext)},
           {"message_erasures", r.message_erasures},
           {"decrypted_message", optional_json(r.decrypted_message)}};
}

void to_json(json& j, const AuthPairing& p) {
  j = json{{"basis_indices", p.basis_indices}, {"value_indices", p.value_indices}};
}

void to_json(json& j, const ModifiedSessionRecord& r) {
  j = json{{"schema_version", kSchemaVersion},
           {"record_type", "modified_session"},
           {"sequence_length", r.sequence_length},
           {"sida_positions", r.sida_positions},
           {"sidb_positions", r.sidb_positions},
           {"announced_pairing", r.announced_pairing},
           {"sida_received_mask", r.sida_received_mask},
           {"bob_verdict", optional_json(r.bob_verdict)},
           {"bob_mismatch_rate", r.bob_mismatch_rate},
           {"bob_announcement", optional_json(r.bob_announcement)},
           {"sidb_received_mask", r.sidb_received_mask},
           {"alice_verdict", optional_json(r.alice_verdict)},
           {"alice_mismatch_rate", r.alice_mismatch_rate},
           {"sc_bases", optional_json(r.sc_bases)},
           {"received_ciphertext", optional_json(r.received_ciphertext)},
           {"message_erasures", r.message_erasures},
           {"decrypted_message", optional_json(r.decrypted_message)},
           {"diagnostic", r.diagnostic}};
}

void to_json(json& j, const AttackState& s) {
  j = json{{"schema_version", kSchemaVersion},
           {"record_type", "attack_state"},
           {"candidate", s.candidate},
           {"match_count", s.match_count},
           {"ever_flipped", s.ever_flipped},
           {"iterations_run", s.iterations_run},
           {"total_flips", s.total_flips},
           {"bits_observed", s.bits_observed}};
}

void to_json(json& j, const ConfidenceReport& r) {
  j = json{{"per_bit_confidence", r.per_bit_confidence},
           {"overall_confidence", r.overall_confidence},
           {"unconfirmed_count", r.unconfirmed_count}};
}

void to_json(json& j, const MonteCarloReport& r) {
  j = json{{"schema_version", kSchemaVersion},
           {"record_type", "monte_carlo"},
           {"label", r.label},
           {"trials", r.trials},
           {"successes", r.successes},
           {"point_estimate", r.point_estimate},
           {"confidence_interval", {r.confidence_interval.low, r.confidence_interval.high}},
           {"confidence_level", r.confidence_level},
           {"oracle_value", optional_json(r.oracle_value)},
           {"seed", r.seed},
           {"config_hash", r.config_hash}};
}

void to_json(json& j, const CorrectionComparison& c) {
  j = json{{"mean_initial_wrong", c.mean_initial_wrong},
           {"simulated_mean_corrected", c.simulated_mean_corrected},
           {"paper_formula_corrected", c.paper_formula_corrected},
           {"simulated_detection_rate", c.simulated_detection_rate},
           {"paper_detection_rate", c.paper_detection_rate}};
}

void to_json(json& j, const TableRow& row) {
  json values = json::object();
  for (const auto& [u, p] : row.probabilities)
    values["u" + std::to_string(u)] = format_percent_truncated(p);
  j = json{{"k", row.k}, {"percent", values}};
}

std::string iteration_log_csv(const IterationLog& log) {
  std::ostringstream out;
  out << "iteration,position,sent_state,announced_bit,flipped\n";
  for (const auto& e : log)
    out << e.iteration << ',' << e.position << ',' << to_string(e.sent_state) << ','
        << static_cast<int>(e.announced_bit) << ',' << (e.flipped ? 1 : 0) << '\n';
  return out.str();
}

std::string table_csv(const std::vector<TableRow>& rows) {
  std::ostringstream out;
  out << "k,u32,u64,u128\n";
  for (const auto& row : rows) {
    out << row.k;
    for (const auto& [u, p] : row.probabilities) out << ',' << format_percent_truncated(p);
    out << '\n';
  }
  return out.str();
}

json table_json(TableKind kind, const std::vector<TableRow>& rows) {
  return json{{"schema_version", kSchemaVersion},
              {"record_type", "table"},
              {"kind", kind == TableKind::worst ? "worst" : "average"},
              {"lengths", kTableLengths},
              {"rows", rows}};
}

}  // namespace qsdc
