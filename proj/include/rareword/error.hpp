#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rareword {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Violated precondition or bad argument; the CLI maps it to exit code 1.
class UsageError : public Error {
public:
  using Error::Error;
};

// Malformed or inconsistent input data; the CLI maps it to exit code 2.
class DataError : public Error {
public:
  using Error::Error;
};

class DecodeError : public DataError {
public:
  DecodeError(const std::string& what, std::size_t offset)
    : DataError(what + " at byte " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

class ParseError : public DataError {
public:
  ParseError(const std::string& what, std::size_t column)
    : DataError(what + " at column " + std::to_string(column)), column_(column) {}

  std::size_t column() const noexcept { return column_; }

private:
  std::size_t column_;
};

} // namespace rareword
