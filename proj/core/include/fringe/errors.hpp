#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fringe {

// Failure taxonomy shared across the library. The CLI maps io_error and
// parse_error to exit code 2 and validation_error to exit code 3.

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file content. Line and column are 1-based.
class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& message, std::size_t line, std::size_t column)
      : std::runtime_error(message + " (line " + std::to_string(line) +
                           ", column " + std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Violated precondition, invariant, or dimension contract.
class validation_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace fringe
