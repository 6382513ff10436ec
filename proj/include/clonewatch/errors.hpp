#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace clonewatch {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input record. `line()` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Bytes that do not decode to a valid group element, key or frame.
class DecodeError : public Error {
 public:
  using Error::Error;
};

/// AEAD tag mismatch; never raised for structural decode problems.
class AuthenticationError : public Error {
 public:
  using Error::Error;
};

class KeyDeliveryError : public Error {
 public:
  using Error::Error;
};

class KeyInvalidError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace clonewatch
