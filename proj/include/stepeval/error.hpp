#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stepeval {

// Bad input or configuration. The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A dataset or side file that could not be parsed; carries the 1-based line.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& cause)
      : ValidationError("line " + std::to_string(line) + ": " + cause), line_(line), cause_(cause) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& cause() const noexcept { return cause_; }

 private:
  std::size_t line_;
  std::string cause_;
};

// Environment failure (unwritable output, I/O). The CLI maps these to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stepeval
