#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gylab {

// Root of every error raised by the library. Callers that only care about
// "did the numerics fail" can catch NumericalError; configuration problems
// surface as ParameterError.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ScopeError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : NumericalError(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// One of det(I + d2H/dpdq) or det(d2H/dp2) vanishes at a lattice site.
class AdmissibilityError : public NumericalError {
 public:
  AdmissibilityError(const std::string& what, std::ptrdiff_t site)
      : NumericalError(what), site_(site) {}
  /// Zero-based momentum index of the offending site, or -1 if not site-specific.
  std::ptrdiff_t site() const noexcept { return site_; }

 private:
  std::ptrdiff_t site_;
};

/// The sensitivity chain W2^T U...U W1 (equivalently the Hessian) is singular.
class ConjugatePointError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Shooting Jacobian is singular: a one-parameter family of classical paths.
class DegenerateFamilyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SearchError : public NumericalError {
 public:
  SearchError(const std::string& what, double lo, double hi)
      : NumericalError(what), lo_(lo), hi_(hi) {}
  double scanned_lo() const noexcept { return lo_; }
  double scanned_hi() const noexcept { return hi_; }

 private:
  double lo_;
  double hi_;
};

}  // namespace gylab
