#pragma once

#include <stdexcept>
#include <string>

namespace rmk {

// Error taxonomy mirrors the CLI exit codes: ConfigError -> 2,
// DataError -> 3, ConditioningError -> 4.

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Query or waypoint outside the grid / series domain.
class BoundsError : public DataError {
public:
  using DataError::DataError;
};

// Singular or numerically unusable linear system.
class ConditioningError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace rmk
