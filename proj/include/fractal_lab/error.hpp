#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace fractal_lab {

// Precondition violations on user-supplied data or parameters.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed point clouds, space specs, or config files. `line` is 1-based
// (0 when the source has no line structure); `field` names the offending
// column or JSON path.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line = 0, std::string field = {})
      : std::runtime_error(decorate(message, line, field)), line_(line), field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string decorate(const std::string& message, std::size_t line, const std::string& field) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += "field '" + field + "': ";
    return out + message;
  }

  std::size_t line_;
  std::string field_;
};

// Dyadic construction could not place a cube consistently.
class ConstructionError : public std::runtime_error {
 public:
  ConstructionError(const std::string& message, int level, std::size_t cube)
      : std::runtime_error(message), level_(level), cube_(cube) {}

  int level() const noexcept { return level_; }
  std::size_t cube() const noexcept { return cube_; }

 private:
  int level_;
  std::size_t cube_;
};

// A requested scale lies outside the range an operation can resolve.
class ScaleOutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace fractal_lab
