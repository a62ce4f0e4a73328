#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "qsdc/analysis.hpp"
#include "qsdc/attack.hpp"
#include "qsdc/bit_string.hpp"
#include "qsdc/modified_protocol.hpp"
#include "qsdc/protocol.hpp"
#include "qsdc/qubit.hpp"

// JSON and CSV views of the simulator's records. Bit strings serialize as
// "0101" strings, qubit states as "Z0"/"Z1"/"X0"/"X1", bases as "Z"/"X",
// verdicts as "accept"/"reject". Positions and indices are 0-based.

namespace qsdc {

inline constexpr int kSchemaVersion = 1;

void to_json(nlohmann::json& j, const BitString& bits);
void to_json(nlohmann::json& j, QubitState s);
void to_json(nlohmann::json& j, Basis b);
void to_json(nlohmann::json& j, Verdict v);
void to_json(nlohmann::json& j, const ChannelConfig& channel);
void to_json(nlohmann::json& j, const InterleavedSequence& seq);
void to_json(nlohmann::json& j, const SessionRecord& record);
void to_json(nlohmann::json& j, const AuthPairing& pairing);
void to_json(nlohmann::json& j, const ModifiedSessionRecord& record);
void to_json(nlohmann::json& j, const AttackState& state);
void to_json(nlohmann::json& j, const ConfidenceReport& report);
void to_json(nlohmann::json& j, const MonteCarloReport& report);
void to_json(nlohmann::json& j, const CorrectionComparison& c);
void to_json(nlohmann::json& j, const TableRow& row);

void from_json(const nlohmann::json& j, BitString& bits);

// Columns: iteration,position,sent_state,announced_bit,flipped
std::string iteration_log_csv(const IterationLog& log);

// Header k,u32,u64,u128; values truncated to one decimal.
std::string table_csv(const std::vector<TableRow>& rows);
nlohmann::json table_json(TableKind kind, const std::vector<TableRow>& rows);

}  // namespace qsdc
