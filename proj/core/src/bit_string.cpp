#include "qsdc/bit_string.hpp"

#include <algorithm>

#include "qsdc/errors.hpp"

namespace qsdc {

BitString::BitString(std::size_t length, std::uint8_t fill) : bits_(length, fill) {
  if (fill > 1) throw ConfigError("BitString: fill must be 0 or 1");
}

BitString::BitString(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  if (std::any_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b > 1; }))
    throw ConfigError("BitString: elements must be 0 or 1");
}

BitString BitString::parse(std::string_view text) {
  std::vector<std::uint8_t> bits;
  bits.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1')
      throw ConfigError("BitString::parse: expected only '0'/'1', got '" + std::string(text) + "'");
    bits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return BitString(std::move(bits));
}

BitString BitString::random(std::size_t length, RandomSource& rng) {
  BitString out(length);
  for (auto& b : out.bits_) b = rng.coin();
  return out;
}

BitString BitString::biased(std::size_t length, double p_zero, RandomSource& rng) {
  if (!(p_zero >= 0.0 && p_zero <= 1.0)) throw ConfigError("BitString::biased: p_zero outside [0,1]");
  BitString out(length);
  for (auto& b : out.bits_) b = rng.bernoulli(p_zero) ? 0 : 1;
  return out;
}

void BitString::set(std::size_t i, std::uint8_t bit) {
  if (bit > 1) throw ConfigError("BitString::set: bit must be 0 or 1");
  bits_.at(i) = bit;
}

void BitString::push_back(std::uint8_t bit) {
  if (bit > 1) throw ConfigError("BitString::push_back: bit must be 0 or 1");
  bits_.push_back(bit);
}

std::size_t BitString::count_ones() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::string BitString::to_string() const {
  std::string s(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) s[i] = static_cast<char>('0' + bits_[i]);
  return s;
}

std::size_t hamming_distance(const BitString& a, const BitString& b) {
  if (a.size() != b.size()) throw ConfigError("hamming_distance: length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]);
  return d;
}

}  // namespace qsdc
