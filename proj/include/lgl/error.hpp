#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lgl {

/// Broad failure classes. The CLI maps each one to its own exit code.
enum class ErrorCategory {
  InvalidInput,  // malformed files, bad ids, violated preconditions
  Config,        // unknown variant, out-of-range parameters
  Degenerate,    // inputs the transform cannot handle (isolated vertex, zero MAD, ...)
  Numerical,     // internal numerical failure
};

inline std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::InvalidInput: return "invalid_input";
    case ErrorCategory::Config: return "config";
    case ErrorCategory::Degenerate: return "degenerate";
    case ErrorCategory::Numerical: return "numerical";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace lgl
