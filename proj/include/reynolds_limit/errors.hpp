#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace reylim {

/// Argument outside the domain of a constitutive law (e.g. a non-positive density).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed configuration or invalid input to an operation.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A nonlinear solve failed. Carries the last residual norm and, when the
/// solver keeps one, the residual history.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, double last_residual,
                std::vector<double> history = {})
      : std::runtime_error(what), last_residual_(last_residual), history_(std::move(history)) {}

  double last_residual() const noexcept { return last_residual_; }
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  double last_residual_;
  std::vector<double> history_;
};

}  // namespace reylim
