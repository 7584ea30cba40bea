#pragma once

#include <stdexcept>
#include <string>

namespace jessy {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed history text (either the linear or the poset format).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A history that violates the transactional model (cycles, reads of
/// unwritten versions, duplicate terminators, ...).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent topology or simulation configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Enumeration or fuzzing bounds beyond the configured budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

}  // namespace jessy
