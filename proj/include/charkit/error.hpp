#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace charkit {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed DSL or expression text; carries a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        detail_(what),
        line_(line),
        column_(column) {}

  const std::string& detail() const { return detail_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  std::string detail_;
  int line_;
  int column_;
};

/// Newton failure, blow-up, division by zero and similar numeric breakdowns.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Violated precondition of an operation (wrong shape, bad input domain).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Evaluation hit variables that have no binding.
class UnboundError : public PreconditionError {
 public:
  UnboundError(const std::string& what, std::vector<std::string> missing)
      : PreconditionError(what), missing_(std::move(missing)) {}

  const std::vector<std::string>& missing() const { return missing_; }

 private:
  std::vector<std::string> missing_;
};

}  // namespace charkit
