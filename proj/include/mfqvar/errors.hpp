#pragma once

#include <stdexcept>
#include <string>

namespace mfq {

/// Error roots. The three categories map onto the CLI exit codes:
/// ConfigError -> 2, DataError -> 3, EstimationError -> 4.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Daily/monthly series misalignment: unsorted or duplicate dates, gaps in the
/// monthly key sequence.
class AlignmentError : public DataError {
 public:
  using DataError::DataError;
};

/// A daily observation's month cannot be served by the monthly series.
class CoverageError : public DataError {
 public:
  using DataError::DataError;
};

/// Not enough lagged observations at the requested position.
class InsufficientHistoryError : public DataError {
 public:
  using DataError::DataError;
};

/// Design matrix numerically rank deficient.
class SingularDesignError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

/// Degenerate residual distribution: the Siddiqui difference quotient is zero.
class ZeroSparsityError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

/// Structural rescaling impossible because the innovation quantile is zero.
class RescaleError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

/// Two fits that must share tau / sample size / nesting structure do not.
class IncompatibilityError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

}  // namespace mfq
