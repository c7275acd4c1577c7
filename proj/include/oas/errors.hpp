#pragma once

#include <stdexcept>
#include <string>

namespace oas {

// Thrown when Q^T Q is not invertible at working precision. Carries the
// condition-number estimate that triggered the rejection.
class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}

  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

// Quadrature (or another iterative numeric routine) failed to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace oas
