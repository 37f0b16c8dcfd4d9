#pragma once

#include <stdexcept>
#include <string>

namespace mflar {

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(std::size_t line, std::size_t column, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// A reference (label or library name) that does not resolve.
class ReferenceError : public std::runtime_error {
 public:
  explicit ReferenceError(std::string name, const std::string& what)
      : std::runtime_error(what), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class OpenFormulaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mflar
