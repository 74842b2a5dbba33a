#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ntgnn {

// Base of every error thrown by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Violated operation precondition (e.g. a vertex pair that is not at the
// requested distance).
class PreconditionError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class BoundsError : public DataError {
 public:
  using DataError::DataError;
};

class DimensionError : public DataError {
 public:
  using DataError::DataError;
};

// Cyclic or otherwise malformed DAG.
class StructureError : public DataError {
 public:
  using DataError::DataError;
};

// Explicit tree expansion exceeded its node budget.
class BudgetError : public DataError {
 public:
  using DataError::DataError;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace ntgnn
