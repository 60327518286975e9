#pragma once

#include <stdexcept>
#include <string>

namespace winfree {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (e.g. z < 1).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent configuration (unsupported family, bad schema).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (divergence, bracket failure, singularity).
class NumericError : public Error {
 public:
  using Error::Error;
};

class IntegrationDiverged : public NumericError {
 public:
  IntegrationDiverged(double time, const std::string& what)
      : NumericError(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class SensitivitySingular : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace winfree
