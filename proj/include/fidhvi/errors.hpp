#pragma once

#include <stdexcept>
#include <string>

namespace fidhvi {

/// Argument outside the domain an operation supports.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A declared problem constant fails one of the well-posedness conditions
/// (strong monotonicity budget, contraction factor, contact compatibility).
class ConstantViolation : public std::runtime_error {
 public:
  ConstantViolation(const std::string& what, double lhs, double rhs)
      : std::runtime_error(what), lhs_(lhs), rhs_(rhs) {}
  explicit ConstantViolation(const std::string& what)
      : std::runtime_error(what) {}

  double lhs() const noexcept { return lhs_; }
  double rhs() const noexcept { return rhs_; }

 private:
  double lhs_ = 0.0;
  double rhs_ = 0.0;
};

/// An iteration exhausted its budget. Derived types carry the best iterate.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double best_residual, int iterations)
      : std::runtime_error(what),
        best_residual_(best_residual),
        iterations_(iterations) {}

  double best_residual() const noexcept { return best_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double best_residual_;
  int iterations_;
};

/// Malformed run configuration or input file.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace fidhvi
