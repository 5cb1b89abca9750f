#pragma once

#include <stdexcept>
#include <string>

namespace ragjack {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or inconsistent configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateIdError : public Error {
 public:
  explicit DuplicateIdError(const std::string& id)
      : Error("duplicate document id '" + id + "'"), id_(id) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numeric operation was asked to work on a zero vector or empty sequence.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Failure talking to an external chat-completion endpoint.
class GenerationError : public Error {
 public:
  GenerationError(const std::string& endpoint, int status, const std::string& what)
      : Error(endpoint + " (status " + std::to_string(status) + "): " + what),
        endpoint_(endpoint),
        status_(status) {}
  const std::string& endpoint() const noexcept { return endpoint_; }
  int status() const noexcept { return status_; }

 private:
  std::string endpoint_;
  int status_;
};

}  // namespace ragjack
