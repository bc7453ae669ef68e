#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace t3star {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent user input (non-finite values, bad indices,
/// missing columns). The CLI maps these to exit code 1.
class InputError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public InputError {
 public:
  using InputError::InputError;
};

/// A documented precondition on subspaces did not hold (containment,
/// nesting).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class EstimabilityError : public Error {
 public:
  using Error::Error;
};

/// Floating-point results that should be integral or exact are not, e.g.
/// a projector trace far from an integer. The CLI maps these to exit code 2.
class NumericalDegeneracyError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : InputError(message + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace t3star
