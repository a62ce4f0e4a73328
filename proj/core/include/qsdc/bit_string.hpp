#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qsdc/random.hpp"

namespace qsdc {

// Ordered sequence of bits; every element is 0 or 1. Holds messages,
// ciphertexts, identity strings and keys.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t length, std::uint8_t fill = 0);
  explicit BitString(std::vector<std::uint8_t> bits);

  // Parses a string of '0'/'1' characters. Throws ConfigError otherwise.
  static BitString parse(std::string_view text);
  static BitString random(std::size_t length, RandomSource& rng);
  // Each bit is 0 with probability p_zero.
  static BitString biased(std::size_t length, double p_zero, RandomSource& rng);

  std::size_t size() const noexcept { return bits_.size(); }
  bool empty() const noexcept { return bits_.empty(); }

  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  std::uint8_t at(std::size_t i) const { return bits_.at(i); }
  void set(std::size_t i, std::uint8_t bit);
  void flip(std::size_t i) { bits_.at(i) ^= 1U; }
  void push_back(std::uint8_t bit);

  auto begin() const noexcept { return bits_.begin(); }
  auto end() const noexcept { return bits_.end(); }
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

  std::size_t count_ones() const noexcept;
  std::string to_string() const;

  friend bool operator==(const BitString&, const BitString&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

std::size_t hamming_distance(const BitString& a, const BitString& b);

}  // namespace qsdc
