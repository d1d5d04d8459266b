#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ncsos {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A generator, word, or polynomial does not fit the operator schema it is used with.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. `line()` is 1-based; 0 means the error is not tied to a line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// The Bell operator has a term that no product of basis monomials reaches.
class BasisTooSmall : public Error {
 public:
  using Error::Error;
};

class CertificateError : public Error {
 public:
  using Error::Error;
};

}  // namespace ncsos
