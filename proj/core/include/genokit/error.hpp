#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace genokit {

/// Failure categories. The CLI prints the category name verbatim so scripts
/// can branch on it.
enum class ErrorKind {
  Format,       // bad magic bytes, unsupported file mode
  Consistency,  // sizes in companion files disagree
  Parse,        // malformed text record
  Io,           // open/read/write failure
  Argument,     // caller passed an out-of-range value
  Data,         // input data cannot support the computation
  Numeric,      // factorization or iteration broke down
  Structure,    // pedigree shape violation
  Window,       // imputation window unusable
  Model,        // variance-component model ill-posed
  Join,         // subject identifiers do not line up across inputs
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace genokit
