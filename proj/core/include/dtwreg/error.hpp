#pragma once

#include <stdexcept>
#include <string>

namespace dtwreg {

/// Input violates a documented precondition or a data invariant.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed file contents. Carries the 1-based line number when known.
class ParseError : public ValidationError {
public:
  ParseError(const std::string& what, std::size_t line)
      : ValidationError(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Filesystem or stream failure.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace dtwreg
