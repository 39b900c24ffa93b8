#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kronmeet {

enum class ErrorKind {
  InvalidSize,
  Parse,
  DimensionMismatch,
  Support,
  RowSum,
  NegativeEntry,
  ZeroOutDegree,
  NonUniqueStationary,
  Reducible,
  Infeasible,
  UnsupportedGraph,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Domain error raised by every library operation. The kind is stable and
/// is what the CLI reports in its structured error output.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& message)
      : Error(ErrorKind::Parse,
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace kronmeet
