#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sqlforge {

// Base of every error thrown by the library. Data-shaped failures (engine
// errors from execution, rejected candidates) are returned as values instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Schema or configuration failed validation. Carries every violation found.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class UnsupportedError : public Error {
 public:
  explicit UnsupportedError(const std::string& construct);
  const std::string& construct() const { return construct_; }

 private:
  std::string construct_;
};

// Tree does not satisfy node invariants, or a plan does not fit the tree.
class StructuralError : public Error {
 public:
  using Error::Error;
};

class AmbiguityError : public Error {
 public:
  AmbiguityError(const std::string& column, std::vector<std::string> candidates);
  const std::vector<std::string>& candidates() const { return candidates_; }

 private:
  std::vector<std::string> candidates_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Model or embedding backend unreachable, or returned a non-2xx status.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Model answered, but the answer did not have the required shape.
class ResponseFormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace sqlforge
