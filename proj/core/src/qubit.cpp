#include "qsdc/qubit.hpp"

#include <string>

#include "qsdc/errors.hpp"

namespace qsdc {
namespace {

void require_bit(std::uint8_t bit, const char* where) {
  if (bit > 1) throw ConfigError(std::string(where) + ": bit must be 0 or 1");
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

std::string_view to_string(QubitState s) noexcept {
  switch (s) {
    case QubitState::Z0: return "Z0";
    case QubitState::Z1: return "Z1";
    case QubitState::X0: return "X0";
    case QubitState::X1: return "X1";
  }
  return "?";
}

std::string_view to_string(Basis b) noexcept { return b == Basis::Z ? "Z" : "X"; }

std::optional<QubitState> parse_qubit_state(std::string_view text) noexcept {
  for (auto s : {QubitState::Z0, QubitState::Z1, QubitState::X0, QubitState::X1})
    if (to_string(s) == text) return s;
  return std::nullopt;
}

void ChannelConfig::validate() const {
  if (!is_probability(p_loss)) throw ConfigError("channel: p_loss must lie in [0,1]");
  if (!is_probability(p_flip)) throw ConfigError("channel: p_flip must lie in [0,1]");
}

QubitState prepare_message_qubit(std::uint8_t bit, RandomSource& rng) {
  require_bit(bit, "prepare_message_qubit");
  return make_state(rng.coin() ? Basis::X : Basis::Z, bit);
}

QubitState prepare_identity_qubit(std::uint8_t bit, RandomSource& rng) {
  require_bit(bit, "prepare_identity_qubit");
  return make_state(basis_for_bit(bit), rng.coin());
}

Measurement measure(QubitState state, Basis basis, RandomSource& rng) {
  const std::uint8_t coin = rng.coin();
  if (in_basis(state, basis)) return {value_of(state), state};
  return {coin, make_state(basis, coin)};
}

std::optional<QubitState> transmit(QubitState state, const ChannelConfig& channel,
                                   RandomSource& rng) {
  const bool lost = rng.bernoulli(channel.p_loss);
  const bool flipped = rng.bernoulli(channel.p_flip);
  if (lost) return std::nullopt;
  return flipped ? partner(state) : state;
}

}  // namespace qsdc
