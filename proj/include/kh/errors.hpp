#pragma once

#include <stdexcept>
#include <string>

namespace kh {

// Root of the library's exception hierarchy. Every precondition violation
// throws a named subclass so callers can dispatch on the failure kind.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BaseMismatch : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};
struct ShapeMismatch : Error {
  using Error::Error;
};
struct NotSuborthonormal : Error {
  using Error::Error;
};
struct NotContraction : Error {
  using Error::Error;
};
struct NotSelfAdjoint : Error {
  using Error::Error;
};
struct ConvergenceFailure : Error {
  using Error::Error;
};
struct UnknownGenerator : Error {
  using Error::Error;
};
struct NotIntertwining : Error {
  using Error::Error;
};
struct InvalidMarkov : Error {
  using Error::Error;
};
struct BottomMismatch : Error {
  using Error::Error;
};
struct EquivarianceViolation : Error {
  using Error::Error;
};
struct NotSingleGenerator : Error {
  using Error::Error;
};
struct NotCylinder : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  using Error::Error;
};

}  // namespace kh
