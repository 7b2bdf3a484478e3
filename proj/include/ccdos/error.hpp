#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ccdos {

// Error categories map onto CLI exit codes: ConfigError -> 2, data-side
// errors (everything derived from DataError) -> 3.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t row, std::size_t col, const std::string& what)
      : DataError("parse error at row " + std::to_string(row) + ", column " +
                  std::to_string(col) + ": " + what),
        row_(row),
        col_(col) {}

  // 1-based line number in the file, 1-based column.
  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

class LabelError : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateData : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateLabels : public DataError {
 public:
  using DataError::DataError;
};

class BadK : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace ccdos
