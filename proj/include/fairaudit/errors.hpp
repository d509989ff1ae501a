#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fairaudit {

// Base for every error raised by the toolkit. Data-level problems (bad
// files, violated preconditions on inputs) derive from DataError so that
// front ends can map them to a single exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t row)
      : DataError(what + " (row " + std::to_string(row) + ")"), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// A value outside the domain a column or parameter admits.
class DomainError : public DataError {
 public:
  using DataError::DataError;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public DataError {
 public:
  using DataError::DataError;
};

// Evidence has zero probability under the structural model.
class AbductionError : public DataError {
 public:
  using DataError::DataError;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace fairaudit
