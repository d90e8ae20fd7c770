#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gcde {

/// Incompatible operand shapes. The message names the shapes involved.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A value-level precondition was violated (bad config, non-symmetric
/// adjacency, empty mask, mismatched trajectory, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed text input. The message carries "<path>:<line>".
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite state encountered during integration.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t step_index)
      : std::runtime_error(what), step_index_(step_index) {}

  /// Index of the time grid point at which the state became non-finite.
  std::size_t step_index() const noexcept { return step_index_; }

 private:
  std::size_t step_index_;
};

/// Requested an unrolled Jacobian beyond the desk-scale size cap.
class OracleSizeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace gcde
