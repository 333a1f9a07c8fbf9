#include "hypercal/error.hpp"

namespace hypercal {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::grid_mismatch: return "grid_mismatch";
    case ErrorCode::shape_mismatch: return "shape_mismatch";
    case ErrorCode::saturation: return "saturation";
    case ErrorCode::span_violation: return "span_violation";
    case ErrorCode::configuration: return "configuration";
    case ErrorCode::domain: return "domain";
    case ErrorCode::degenerate: return "degenerate";
    case ErrorCode::training_diverged: return "training_diverged";
    case ErrorCode::io: return "io";
    case ErrorCode::format: return "format";
  }
  return "unknown";
}

}  // namespace hypercal
