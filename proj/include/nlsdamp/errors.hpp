#pragma once

#include <stdexcept>
#include <string>

namespace nlsdamp {

/// Bad input: out-of-range parameters, malformed configs, unknown presets.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation ran but did not produce a trustworthy answer
/// (non-convergence, bracketing failure, non-finite values, contamination).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem and serialization problems.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nlsdamp
