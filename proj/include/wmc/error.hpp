#pragma once

#include <stdexcept>
#include <string>

namespace wmc {

/// Malformed weighted DIMACS input.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Parameter outside the range an algorithm accepts (epsilon, delta, tilt, window bounds...).
class ParamError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A weight function produced a value outside (0,1].
class WeightError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Misuse of the solver API (stale checkpoint, blocking clause over the wrong support).
class SolverError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The exact oracle hit its enumeration cap.
class OracleLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every core of an approximate count failed.
class CountingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wmc
