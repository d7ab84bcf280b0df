#pragma once

#include <stdexcept>
#include <string>

namespace opbsp {

// Root of the library's exception hierarchy. The CLI maps subclasses to exit
// codes (see tools/opbsp_main.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (CSV, JSON, LP/MPS). `line` is 1-based, 0 if unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Structurally invalid block model: missing or duplicate lattice positions,
// negative resource use, bad dimensions.
class ModelError : public Error {
 public:
  using Error::Error;
};

// A decision that violates the slope rule or targets an exhausted column.
class InadmissibleDecision : public Error {
 public:
  using Error::Error;
};

// Explicit refusal of an exact method whose enumeration budget is exceeded.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

// No schedule or LP point satisfies the constraints.
class Infeasible : public Error {
 public:
  using Error::Error;
};

// Command-line or configuration misuse.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace opbsp
