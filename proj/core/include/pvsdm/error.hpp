#pragma once

#include <stdexcept>
#include <string>

namespace pvsdm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation
/// (non-positive temperature, invalid parameter set, exponent overflow).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition that is not a plain domain
/// check, e.g. asking for a slope at a point that is not on the curve.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent data (files, curves, mismatched series).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Iterative solve that did not reach its tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double last_iterate, double last_residual)
      : Error(what), last_iterate_(last_iterate), last_residual_(last_residual) {}

  double last_iterate() const noexcept { return last_iterate_; }
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_iterate_;
  double last_residual_;
};

}  // namespace pvsdm
