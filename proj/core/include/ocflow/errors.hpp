#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace ocflow {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A field, mesh, or map violates a size precondition or two operands
/// disagree on their dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing an external file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver failed; carries the last relative residual when known.
class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what) : Error(what) {}
  SolverError(const std::string& what, double final_residual)
      : Error(what), final_residual_(final_residual) {}
  double final_residual() const { return final_residual_; }

 private:
  double final_residual_ = std::numeric_limits<double>::quiet_NaN();
};

/// A requested explicit time step violates the CFL stability bound.
class CflError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace ocflow
