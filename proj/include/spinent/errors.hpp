#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace spinent {

/// Violated precondition (dimension mismatch, zero vector, bad site index).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Invalid model or run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Eigensolver failed to converge within its matvec budget.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<double> residuals = {})
      : std::runtime_error(what), residuals_(std::move(residuals)) {}

  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

/// A degenerate level straddles the requested cutoff by more than the allowed slack.
class MultipletOverflow : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Numerical input that fails a physical invariant (e.g. non-PSD density matrix).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Eigenvector that is not an S^2 eigenstate, or a spectrum lacking the levels a gap needs.
class ClassificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a transform (log of a non-positive value).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spinent
