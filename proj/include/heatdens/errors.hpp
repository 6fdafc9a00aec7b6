#pragma once

#include <stdexcept>
#include <string>

namespace heatdens {

// Process exit codes used by the command-line front end. Every library
// exception maps onto exactly one of these.
enum class ExitCode : int {
  ok = 0,
  validation = 2,
  hypothesis = 3,
  degeneracy = 4,
  non_convergence = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, std::string kind, const std::string& what)
      : std::runtime_error(what), code_(code), kind_(std::move(kind)) {}

  ExitCode code() const noexcept { return code_; }
  // Short machine-readable tag, e.g. "singular covariance".
  const std::string& kind() const noexcept { return kind_; }

 private:
  ExitCode code_;
  std::string kind_;
};

// Invalid input: evaluation point outside the open domain, bad orders,
// malformed configuration.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ExitCode::validation, "domain error", what) {}
};

// A density route was handed a coefficient model of the other kind.
class WrongModelError : public Error {
 public:
  explicit WrongModelError(const std::string& what)
      : Error(ExitCode::validation, "wrong model", what) {}
};

// A random-variable law without a sampler or node rule was requested.
class UnsupportedLawError : public Error {
 public:
  explicit UnsupportedLawError(const std::string& what)
      : Error(ExitCode::validation, "unsupported law", what) {}
};

// A theorem precondition that the computation cannot proceed without,
// e.g. T_N(phi_1) vanishing at an alpha^2 node.
class HypothesisViolation : public Error {
 public:
  explicit HypothesisViolation(const std::string& what)
      : Error(ExitCode::hypothesis, "hypothesis violation", what) {}
};

// Singular or numerically degenerate covariance. Carries the offending
// condition number (infinity when the matrix is exactly singular).
class DegeneracyError : public Error {
 public:
  DegeneracyError(const std::string& what, double condition_number)
      : Error(ExitCode::degeneracy, "singular covariance", what),
        condition_number_(condition_number) {}

  double condition_number() const noexcept { return condition_number_; }

 private:
  double condition_number_;
};

// Distribution with (numerically) zero spread where a spread is required.
class DegenerateDistribution : public Error {
 public:
  explicit DegenerateDistribution(const std::string& what)
      : Error(ExitCode::degeneracy, "degenerate distribution", what) {}
};

class NonConvergence : public Error {
 public:
  explicit NonConvergence(const std::string& what)
      : Error(ExitCode::non_convergence, "non-convergence", what) {}
};

}  // namespace heatdens
