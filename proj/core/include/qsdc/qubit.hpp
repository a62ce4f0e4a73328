#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "qsdc/random.hpp"

namespace qsdc {

// The four single-photon states |0>, |1>, |+>, |->.
enum class QubitState : std::uint8_t { Z0, Z1, X0, X1 };

// B_Z = {|0>,|1>}, B_X = {|+>,|->}.
enum class Basis : std::uint8_t { Z, X };

constexpr Basis basis_of(QubitState s) noexcept {
  return (s == QubitState::Z0 || s == QubitState::Z1) ? Basis::Z : Basis::X;
}

// 0 for |0>,|+>; 1 for |1>,|->.
constexpr std::uint8_t value_of(QubitState s) noexcept {
  return (s == QubitState::Z1 || s == QubitState::X1) ? 1 : 0;
}

constexpr QubitState make_state(Basis b, std::uint8_t value) noexcept {
  if (b == Basis::Z) return value ? QubitState::Z1 : QubitState::Z0;
  return value ? QubitState::X1 : QubitState::X0;
}

constexpr bool in_basis(QubitState s, Basis b) noexcept { return basis_of(s) == b; }

// Same-basis orthogonal state: Z0<->Z1, X0<->X1.
constexpr QubitState partner(QubitState s) noexcept {
  return make_state(basis_of(s), value_of(s) ^ 1U);
}

// Identity-bit basis rule shared by every party: 0 -> B_Z, 1 -> B_X.
constexpr Basis basis_for_bit(std::uint8_t bit) noexcept { return bit ? Basis::X : Basis::Z; }

// Public announcement of a measured state. Drops the basis.
constexpr std::uint8_t announce_encoding(QubitState s) noexcept { return value_of(s); }

std::string_view to_string(QubitState s) noexcept;
std::string_view to_string(Basis b) noexcept;
std::optional<QubitState> parse_qubit_state(std::string_view text) noexcept;

// Quantum channel: a photon is lost with probability p_loss; a surviving
// photon is replaced by its same-basis partner with probability p_flip.
struct ChannelConfig {
  double p_loss = 0.0;
  double p_flip = 0.0;

  static constexpr ChannelConfig ideal() noexcept { return {}; }
  bool is_ideal() const noexcept { return p_loss == 0.0 && p_flip == 0.0; }
  // Throws ConfigError unless both probabilities lie in [0, 1].
  void validate() const;
};

struct Measurement {
  std::uint8_t outcome;
  QubitState collapsed;
};

// Message-qubit preparation: the bit fixes the value, the basis is random.
QubitState prepare_message_qubit(std::uint8_t bit, RandomSource& rng);

// Identity-qubit preparation: the bit fixes the basis, the value is random.
QubitState prepare_identity_qubit(std::uint8_t bit, RandomSource& rng);

// Projective measurement. Deterministic when the state lies in the basis,
// uniform otherwise; the state collapses onto the outcome. Always consumes
// exactly one draw.
Measurement measure(QubitState state, Basis basis, RandomSource& rng);

// Returns nullopt when the photon is lost. Always consumes exactly two draws.
std::optional<QubitState> transmit(QubitState state, const ChannelConfig& channel,
                                   RandomSource& rng);

}  // namespace qsdc
