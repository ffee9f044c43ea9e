#pragma once

#include <stdexcept>
#include <string>

namespace ctgp {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Logarithm or inverse Jacobian evaluated too close to a singular rotation angle.
class IllConditionedError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of the operation (query time, arclength, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Input samples do not cover the requested interval.
class CoverageError : public Error {
 public:
  using Error::Error;
};

// Not enough data to build the requested object.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Covariance / power-spectral-density matrix is not symmetric positive definite.
class HyperparameterError : public Error {
 public:
  using Error::Error;
};

// The local chart of an interval is violated (relative rotation reaches pi).
class IntervalTooLongError : public Error {
 public:
  using Error::Error;
};

// Factors, nodes and interval blocks that do not belong together.
class WiringError : public Error {
 public:
  using Error::Error;
};

// Measurement geometry without a usable derivative (e.g. robot on a landmark).
class SingularGeometryError : public Error {
 public:
  using Error::Error;
};

// Factor that carries no information (e.g. empty mask).
class DegenerateFactorError : public Error {
 public:
  using Error::Error;
};

// Normal equations are singular; the problem has unconstrained directions.
class GaugeFreedomError : public Error {
 public:
  using Error::Error;
};

// Continuum-robot geometry that does not fit the rod.
class GeometryError : public Error {
 public:
  using Error::Error;
};

// Invalid scenario / configuration file content.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctgp
