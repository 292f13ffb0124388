#pragma once

#include <stdexcept>
#include <string>

namespace vfshm {

/// Failure category. The CLI maps these onto exit codes.
enum class ErrorKind {
  Config,   // invalid options or arguments
  Data,     // malformed / inconsistent input data
  Numeric,  // numerical breakdown (conditioning, eigen-solve, overflow)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

/// Least-squares system too ill-conditioned to yield a usable solution.
class IllConditionedError : public NumericError {
 public:
  IllConditionedError(const std::string& what, double condition)
      : NumericError(what), condition_(condition) {}
  double condition_estimate() const noexcept { return condition_; }

 private:
  double condition_;
};

}  // namespace vfshm
