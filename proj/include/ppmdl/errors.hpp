#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ppmdl {

/// Malformed input text; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Input that parses but violates a model constraint.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class EmptySequenceError : public DomainError {
 public:
  EmptySequenceError() : DomainError("empty event sequence") {}
};

class InvalidCycleError : public DomainError {
 public:
  using DomainError::DomainError;
};

class InvalidPatternError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A pattern whose parameters do not fit the code-length budgets.
class UncodablePatternError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace ppmdl
