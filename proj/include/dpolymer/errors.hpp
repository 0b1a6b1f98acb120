#pragma once

#include <stdexcept>
#include <string>

namespace dpolymer {

/// Invalid user input: bad parameters, malformed config, dimension mismatch.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A kernel family lacks the capability an operation needs
/// (e.g. a spectral sampler for a user-radial profile).
class UnsupportedFamily : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Numerical failure: Cholesky exhausted its jitter ladder, quadrature did
/// not converge, all Gibbs weights underflowed.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dpolymer
