#pragma once

#include <stdexcept>
#include <string>

namespace spnet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Field or vector sizes do not match the network / operator.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// Invalid user configuration (mesh size, config file, CLI flags).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Input data breaks a structural invariant (self-loop, duplicate edge, ...).
class NetworkError : public Error {
public:
  using Error::Error;
};

/// A network assumption needed by the method does not hold
/// (empty element, box that cannot be connected, ...).
class AssumptionViolation : public Error {
public:
  using Error::Error;
};

/// Singular or indefinite system detected during assembly or factorization.
class SingularError : public Error {
public:
  using Error::Error;
};

/// Fiber network generation could not satisfy its configuration.
class GenerationError : public Error {
public:
  using Error::Error;
};

/// An iterative method hit its iteration cap.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

/// CG detected a non-positive curvature or preconditioned residual.
class BreakdownError : public Error {
public:
  using Error::Error;
};

} // namespace spnet
