#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace mlenkbf {

// Base of every error raised by the library. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Errors that name the offending matrix.
class NamedMatrixError : public Error {
 public:
  NamedMatrixError(std::string name, const std::string& what)
      : Error("matrix '" + name + "' " + what), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class NotSymmetric : public NamedMatrixError {
 public:
  explicit NotSymmetric(std::string name)
      : NamedMatrixError(std::move(name), "is not symmetric") {}
};

class Singular : public NamedMatrixError {
 public:
  explicit Singular(std::string name)
      : NamedMatrixError(std::move(name), "is singular") {}
};

class NotPSD : public NamedMatrixError {
 public:
  explicit NotPSD(std::string name)
      : NamedMatrixError(std::move(name), "is not positive semi-definite") {}
};

class BadLength : public Error {
 public:
  using Error::Error;
};

class TooFewParticles : public Error {
 public:
  explicit TooFewParticles(long n)
      : Error("ensemble needs at least 2 particles, got " + std::to_string(n)) {}
};

class LevelMismatch : public Error {
 public:
  using Error::Error;
};

class BadEpsilon : public Error {
 public:
  explicit BadEpsilon(double eps)
      : Error("eps must lie in (0, 1), got " + std::to_string(eps)) {}
};

class PlanPathMismatch : public Error {
 public:
  using Error::Error;
};

class TooFewPoints : public Error {
 public:
  using Error::Error;
};

class NonPositive : public Error {
 public:
  using Error::Error;
};

// Malformed or missing configuration input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mlenkbf
