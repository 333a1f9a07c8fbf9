#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hypercal {

/// Failure categories surfaced by the library. The CLI prints the
/// category name as the machine-readable `code=` field.
enum class ErrorCode {
  invalid_argument,
  grid_mismatch,
  shape_mismatch,
  saturation,
  span_violation,
  configuration,
  domain,
  degenerate,
  training_diverged,
  io,
  format,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hypercal
