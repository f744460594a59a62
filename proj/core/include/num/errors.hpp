#pragma once

#include <stdexcept>
#include <string>

namespace num {

/// Malformed or invalid input: bad scenario text, violated preconditions,
/// dimension mismatches. The CLI maps this to exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Scenario text that fails to parse. Carries the 1-based line number.
class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A numerical procedure failed: solver non-convergence, integrator
/// divergence. The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace num
