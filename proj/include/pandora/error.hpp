#pragma once

#include <stdexcept>
#include <string>

namespace pandora {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (bad JSON, bad rational literal, missing field).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The requested operation does not apply to this constraint structure.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// An exhaustive method was asked to go beyond its hard size cap.
class CapExceededError : public Error {
 public:
  using Error::Error;
};

}  // namespace pandora
