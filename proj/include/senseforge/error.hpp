#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace senseforge {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input. Carries the source name and 1-based line when known.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

// Well-formed input that violates a uniqueness or reference constraint.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Invalid parameters (e.g. K = 0, more clusters than points).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Mathematical domain violations (zero-norm vectors, empty tables).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Sampler could not run (e.g. no tokens to assign).
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace senseforge
