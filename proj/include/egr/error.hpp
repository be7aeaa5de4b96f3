#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace egr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input record. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Structurally valid input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Bad parameter or configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Training data with a single class.
class DegenerateLabelsError : public Error {
 public:
  DegenerateLabelsError() : Error("degenerate labels: both classes must be present") {}
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Missing or unreadable file.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace egr
