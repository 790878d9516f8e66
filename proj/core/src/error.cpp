#include "socialmotion/error.h"

namespace socialmotion {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return "invalid_argument";
    case ErrorCode::ShapeMismatch:
      return "shape_mismatch";
    case ErrorCode::NonFinite:
      return "non_finite";
    case ErrorCode::Degenerate:
      return "degenerate";
    case ErrorCode::OutOfRange:
      return "out_of_range";
    case ErrorCode::Io:
      return "io";
    case ErrorCode::Format:
      return "format";
    case ErrorCode::Integrity:
      return "integrity";
    case ErrorCode::UnsupportedVersion:
      return "unsupported_version";
    case ErrorCode::Grammar:
      return "grammar";
    case ErrorCode::UnknownToken:
      return "unknown_token";
    case ErrorCode::Divergence:
      return "divergence";
    case ErrorCode::PipelineOrder:
      return "pipeline_order";
    case ErrorCode::Infeasible:
      return "infeasible";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

} // namespace socialmotion
