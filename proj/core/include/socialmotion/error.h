#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace socialmotion {

enum class ErrorCode {
  InvalidArgument,
  ShapeMismatch,
  NonFinite,
  Degenerate,
  OutOfRange,
  Io,
  Format,
  Integrity,
  UnsupportedVersion,
  Grammar,
  UnknownToken,
  Divergence,
  PipelineOrder,
  Infeasible,
};

// Stable machine-readable name, e.g. "shape_mismatch".
std::string_view error_code_name(ErrorCode code);

// All library failures surface as this exception type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept {
    return code_;
  }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

} // namespace socialmotion
