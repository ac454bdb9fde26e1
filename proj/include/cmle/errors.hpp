#pragma once

#include <stdexcept>
#include <string>

namespace cmle {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of the operation (zero vector, n <= p, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of the operation does not hold.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Singular, ill-conditioned or non-finite intermediate quantities.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed external input (CSV, configuration).
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace cmle
