#pragma once

#include <stdexcept>
#include <string>

namespace uavstop {

// Argument outside the mathematical domain of an operation (off-ladder value,
// negative Taler, malformed price list, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Operation invoked in a state where the rules of the mission or the session
// forbid it (flying after a crash, deciding out of phase, ...).
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Query against an object that is not yet in the required state.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Invalid configuration (mission parameters, agent profiles, config files).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed client input (plan shape, price-list length, schema violations).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace uavstop
