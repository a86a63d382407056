#pragma once

#include <stdexcept>
#include <string>

namespace highway_rl {

/// Invalid configuration or incompatible dimensions supplied by the caller.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A persisted artifact could not be read or does not match the expected layout.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An API precondition was broken (programming error on the caller side).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Training produced non-finite values.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace highway_rl
