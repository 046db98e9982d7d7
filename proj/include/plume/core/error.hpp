#pragma once

#include <stdexcept>
#include <string>

namespace plume {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition on a numeric argument violated (non-positive temperature,
/// empty pixel set, insufficient samples, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver produced a non-finite value or failed to bracket.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  enum class Kind { MalformedHeader, DimensionMismatch, TruncatedPayload };

  ParseError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace plume
