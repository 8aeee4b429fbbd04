#include "touchreg/error.hpp"

namespace touchreg {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
    case ErrorKind::NotFound: return "not_found";
    case ErrorKind::Degenerate: return "degenerate";
  }
  return "unknown";
}

}  // namespace touchreg
