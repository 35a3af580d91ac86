#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mimpact {

/// Argument or parameter outside the supported domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The impact integral diverges for the requested parameters (1 + alpha*delta - gamma <= 0).
class DivergenceError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Requested volume exceeds what the latent book can absorb.
class SaturationError : public DomainError {
 public:
  SaturationError(const std::string& what, double capacity)
      : DomainError(what), capacity_(capacity) {}
  double capacity() const noexcept { return capacity_; }

 private:
  double capacity_;
};

/// Malformed or missing input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive quadrature ran out of budget before reaching the tolerance.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double estimate, double error_estimate)
      : std::runtime_error(what), estimate_(estimate), error_estimate_(error_estimate) {}
  double estimate() const noexcept { return estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double estimate_;
  double error_estimate_;
};

/// Nonlinear fit failed; `trace` holds the chi-square after each accepted iteration.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, std::vector<double> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

}  // namespace mimpact
