#pragma once

#include <stdexcept>
#include <string>

namespace rb {

// Error taxonomy mirrors the CLI exit codes: config 2, data 3, numerical 4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid run configuration: bad mode/model combination, missing
// precomputed state, exhausted permutation without reset, ...
struct ConfigError : Error {
  using Error::Error;
};

// Malformed or inconsistent input data (non-binary entries, negative
// counts, empty groups, unreadable files).
struct DataError : Error {
  using Error::Error;
};

// Numerical failure during a fit.
struct NumericalError : Error {
  using Error::Error;
};

// Invalid parameter values passed to a density or sampler.
struct DomainError : NumericalError {
  using NumericalError::NumericalError;
};

// Covariance factorization failed even after the jitter policy.
struct SingularError : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace rb
