#pragma once

#include <stdexcept>
#include <string>

namespace gridshare {

// Error families. The CLI maps each family to its own exit code.

/// Invalid run configuration (bad key, bad value, missing path).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (CSV rows, misaligned series).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numeric procedure could not produce a meaningful answer.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gridshare
