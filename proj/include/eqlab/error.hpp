#pragma once

#include <stdexcept>
#include <string>

namespace eqlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain (non-positive price, bad shares).
class DomainError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class UnsupportedFamilyError : public Error {
 public:
  using Error::Error;
};

/// A closed-form B(r) point fell outside the positive price cone.
class OutOfConeError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// Continuation step exceeded its price-jump cap (suspected branch jump).
class ContinuationError : public Error {
 public:
  using Error::Error;
};

class DegenerateChartError : public Error {
 public:
  using Error::Error;
};

class NonOrientableSamplingError : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration failed validation; `path()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace eqlab
