#pragma once

#include <stdexcept>
#include <string>

namespace touchreg {

// Families of failures. The CLI maps each family to its own exit code and the
// service maps them to HTTP status codes.
enum class ErrorKind {
  InvalidArgument,  // a value violates a type invariant
  Precondition,     // an operation's precondition is not met (e.g. too few correspondences)
  Parse,            // malformed file content; message carries line/byte position
  Io,               // file missing or unreadable/unwritable
  NotFound,         // referenced id does not exist
  Degenerate,       // solver could not make progress from any start
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

}  // namespace touchreg
