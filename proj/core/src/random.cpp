#include "qsdc/random.hpp"

#include <limits>

#include "qsdc/errors.hpp"

namespace qsdc {

std::size_t RandomSource::below(std::size_t n) {
  if (n == 0) throw ConfigError("RandomSource::below: empty range");
  const std::uint64_t range = n;
  // Reject the top partial block so every residue is equally likely.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return static_cast<std::size_t>(x % range);
}

}  // namespace qsdc
