#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hanf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input (structure, signature, formula or sphere files).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A configured resource cap was hit. `partial` describes how far the
/// computation got before giving up.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, std::string partial = {})
      : Error(what), partial_(std::move(partial)) {}

  const std::string& partial() const noexcept { return partial_; }

 private:
  std::string partial_;
};

}  // namespace hanf
