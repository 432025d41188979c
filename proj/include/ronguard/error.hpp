#pragma once

#include <stdexcept>
#include <string>

namespace ronguard {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by a caller-supplied argument.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// CSV header does not match the expected column layout.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& column, const std::string& what)
      : Error(what), column_(column) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

/// A data row could not be parsed or violates a sample invariant.
class RowError : public Error {
 public:
  RowError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

/// A feature has zero variance, so it cannot be standardized.
class DegenerateFeatureError : public Error {
 public:
  explicit DegenerateFeatureError(std::size_t feature)
      : Error("feature " + std::to_string(feature) + " has zero variance"), feature_(feature) {}
  std::size_t feature() const noexcept { return feature_; }

 private:
  std::size_t feature_;
};

/// The SVM dual solver hit its iteration cap before meeting the KKT tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(double max_violation, const std::string& what)
      : Error(what), max_violation_(max_violation) {}
  double max_violation() const noexcept { return max_violation_; }

 private:
  double max_violation_;
};

/// Data cannot support the requested procedure (e.g. no usable validation fold).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed serialized model or configuration document.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace ronguard
