#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hkcalc {

/// Point outside the compact set a function or measure lives on.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Malformed or inconsistent arguments (mismatched domains, eps <= 0, ...).
class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative construction did not reach its target accuracy.
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Eigensolver / power iteration failed to converge.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// One-sided limit extraction failed; the input is probably not regulated.
class EssentialDiscontinuityError : public ConvergenceError {
public:
  using ConvergenceError::ConvergenceError;
};

/// Partition sweep exceeded its cell budget.
class GaugeTooSmallError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Truncated integrals failed to certify by the configured horizon.
class DivergenceSuspected : public std::runtime_error {
public:
  DivergenceSuspected(const std::string& what, std::vector<double> partial_sums)
      : std::runtime_error(what), partial_sums_(std::move(partial_sums)) {}

  const std::vector<double>& partial_sums() const noexcept { return partial_sums_; }

private:
  std::vector<double> partial_sums_;
};

}  // namespace hkcalc
