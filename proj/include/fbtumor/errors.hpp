#pragma once

#include <stdexcept>
#include <string>

namespace fbtumor {

/// Bad input to an operation: arguments outside the documented domain.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// Model parameters violate a standing assumption (checked cheaply at entry
/// of every solver operation; the full sampled report comes from
/// validate_params).
class AssumptionError : public DomainError {
 public:
  explicit AssumptionError(const std::string& what) : DomainError(what) {}
};

/// An iteration failed to meet its tolerance budget: bracket growth hit its
/// doubling cap, a bisection interval collapsed while the residual stayed
/// large, or an integrator exceeded its step budget.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// The solver observed something the model structure rules out (a shooting
/// residual that does not bracket, or loses monotonicity). Usually means the
/// supplied rate functions do not satisfy the declared assumptions.
class ConsistencyError : public std::runtime_error {
 public:
  explicit ConsistencyError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fbtumor
