#pragma once

#include <stdexcept>
#include <string>

namespace arznet {

/// Raised when an argument lies outside the domain of a model function
/// (negative density, priority outside ]0,1[, malformed assignment row, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// An iterative solve did not reach its tolerance. The message carries the
/// bracket, residual and iteration count so the failure can be reproduced.
class NumericalFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A flux was requested that no state on the given attribute curve can carry.
class InfeasibleFlux : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Time step exceeds the admissible CFL bound.
class CflViolation : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed scenario input. The message names the line (syntax errors) or
/// the offending field path.
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace arznet
