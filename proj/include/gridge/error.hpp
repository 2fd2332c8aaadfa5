#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridge {

enum class ErrorKind {
  InvalidInput,
  NotPositiveSemiDefinite,
  NotPositiveDefinite,
  SingularMatrix,
  ConvergenceFailure,
  NumericalFailure,
  GenerationFailure,
  SelectionFailure,
  InvalidSplit,
  InputError,
  SpanError,
  UnsupportedDimension,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::NotPositiveSemiDefinite: return "NotPositiveSemiDefinite";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::GenerationFailure: return "GenerationFailure";
    case ErrorKind::SelectionFailure: return "SelectionFailure";
    case ErrorKind::InvalidSplit: return "InvalidSplit";
    case ErrorKind::InputError: return "InputError";
    case ErrorKind::SpanError: return "SpanError";
    case ErrorKind::UnsupportedDimension: return "UnsupportedDimension";
  }
  return "Unknown";
}

/// Base exception for every failure raised by the library. The kind is
/// machine-readable and is what the CLI reports in its error JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace gridge
