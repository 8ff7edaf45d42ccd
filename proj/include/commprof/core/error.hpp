#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace commprof {

// Base of every error the library reports. CLI exit codes are derived from
// the concrete subclass.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid input: malformed parameters, shapes, config files or formulas.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A name (framework, op, model, grouping) that does not resolve.
class UnknownEntityError : public Error {
 public:
  using Error::Error;
};

// Compiler invariant violated by the traced program (unbalanced labels,
// emission outside a context, input-dependent loop bodies).
class CompileError : public Error {
 public:
  using Error::Error;
};

// Formula evaluation failed (division by zero, log of non-positive value,
// negative cost, overflow).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& message, std::size_t position)
      : ValidationError(message + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace commprof
