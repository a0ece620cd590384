#pragma once

#include <stdexcept>
#include <string>

namespace macroent {

/// Invalid user-supplied input: bad config values, empty mode lists, bad
/// sweep grids. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical or physical consistency failure (non-symmetric covariance,
/// uncertainty-principle violation, singular fit). Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Conditioning on an observable with zero total variance and an
/// inconsistent outcome.
class DegenerateMeasurement : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Pulse-sequence operations invoked out of order.
class ProtocolError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace macroent
