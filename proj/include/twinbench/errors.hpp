#pragma once

#include <stdexcept>
#include <string>

namespace twinbench {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed document (bad JSON, wrong types, unknown keys).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed document that breaks a data-model invariant.
class InvariantError : public Error {
 public:
  InvariantError(std::string field, const std::string& reason)
      : Error(field + ": " + reason), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Precondition failure on an operation's arguments.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

}  // namespace twinbench
