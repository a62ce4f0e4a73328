#pragma once

#include <stdexcept>

namespace qsdc {

// Invalid parameters or mismatched inputs supplied by the caller.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a party is handed a transcript that violates the protocol
// (e.g. announced positions outside the received sequence).
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace qsdc
