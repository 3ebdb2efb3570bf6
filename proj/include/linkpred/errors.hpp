#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace linkpred {

/// Broad failure category. Each maps onto one CLI exit code.
enum class ErrorCategory { Config = 1, Data = 2, Numeric = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

 private:
  ErrorCategory category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorCategory::Config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorCategory::Numeric, what) {}
};

// Data-side failures.

class ParseError : public DataError {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& detail)
      : DataError(file + ":" + std::to_string(line) + ": " + detail), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ReferentialError : public DataError {
 public:
  using DataError::DataError;
};

class ValidationError : public DataError {
 public:
  using DataError::DataError;
};

/// Argument outside an operation's domain (unknown node, u == v, single-class labels...).
class DomainError : public DataError {
 public:
  using DataError::DataError;
};

class SamplingError : public DataError {
 public:
  using DataError::DataError;
};

class StratificationError : public DataError {
 public:
  using DataError::DataError;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

/// A stage was asked to run before the artifact it consumes exists.
class DependencyError : public DataError {
 public:
  using DataError::DataError;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

// Numeric failures.

class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& what, double gap)
      : NumericError(what), gap_(gap) {}
  /// KKT violation (max violating pair gap) at the point training stopped.
  double duality_gap() const noexcept { return gap_; }

 private:
  double gap_;
};

class DivergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace linkpred
