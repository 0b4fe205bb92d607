#pragma once

#include <stdexcept>
#include <string>

namespace flightstab {

// Bad user input: malformed files, out-of-range arguments, invariant violations.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation that could not produce a trustworthy answer (singular systems,
// non-convergent iterations, failed residual checks).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public InputError {
 public:
  ParseError(int line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace flightstab
