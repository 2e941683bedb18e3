#pragma once

#include <stdexcept>
#include <string>

namespace otlab {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedDimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// Raised by integrate() when the integrand is NaN/Inf at a node; the message
// carries the offending node.
class NonFiniteIntegrandError : public Error {
 public:
  using Error::Error;
};

class InvalidCovarianceError : public Error {
 public:
  using Error::Error;
};

// Normalization box too small: visible tail mass under order/radius doubling.
class DomainTooSmallError : public Error {
 public:
  using Error::Error;
};

class UnderflowError : public Error {
 public:
  using Error::Error;
};

class ConvergenceFailureError : public Error {
 public:
  ConvergenceFailureError(const std::string& what, double violation)
      : Error(what), marginal_violation(violation) {}
  double marginal_violation;
};

class AsymmetryError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

// Evaluation point outside the box a map or field is defined on.
class DomainBoxError : public Error {
 public:
  using Error::Error;
};

class RegistryError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string field_path)
      : Error(what), field(std::move(field_path)) {}
  std::string field;
};

}  // namespace otlab
