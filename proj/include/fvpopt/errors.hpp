#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fvpopt {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A library call was made with arguments that violate its preconditions
/// (dimension mismatch, empty input, out-of-range parameter).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// An experiment or algorithm configuration is invalid.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The gradient step size lies outside the open interval that guarantees
/// the gradient map is a contraction.
class AdmissibilityError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// A subgradient oracle returned a zero vector at an infeasible point.
class DegenerateOracleError : public Error {
 public:
  using Error::Error;
};

/// Random sampling could not produce a usable sample (e.g. all pairs coincide).
class SamplingError : public Error {
 public:
  using Error::Error;
};

/// The iteration produced a non-finite iterate or left the divergence guard.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step) : Error(what), step_(step) {}

  /// Index n of the iterate x_n from which the offending step was taken.
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

}  // namespace fvpopt
