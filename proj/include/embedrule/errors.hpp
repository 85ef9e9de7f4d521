#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace embedrule {

// Base for all library errors. CLI maps ConfigError to exit code 2 and
// everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class LookupError : public Error {
 public:
  explicit LookupError(const std::string& token)
      : Error("unknown token '" + token + "'"), token_(token) {}

  const std::string& token() const { return token_; }

 private:
  std::string token_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Operation not defined for a model kind (e.g. composing NTN relations).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace embedrule
