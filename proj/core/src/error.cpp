#include "genokit/error.hpp"

namespace genokit {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Format: return "format";
    case ErrorKind::Consistency: return "consistency";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
    case ErrorKind::Argument: return "argument";
    case ErrorKind::Data: return "data";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Structure: return "structure";
    case ErrorKind::Window: return "window";
    case ErrorKind::Model: return "model";
    case ErrorKind::Join: return "join";
  }
  return "unknown";
}

}  // namespace genokit
