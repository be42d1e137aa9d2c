#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace daa {

enum class ErrorCode {
  bad_magic,
  unsupported_version,
  truncated_payload,
  non_finite_value,
  negative_value,
  shape_mismatch,
  invalid_trajectory,
  index_out_of_range,
  config_out_of_range,
  solver_stalled,
  non_finite_state,
  degenerate_data,
  single_class_dataset,
  length_mismatch,
  invalid_axis_value,
  invalid_params,
  invalid_manifest,
  io_error,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// CLI and the Python layer can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace daa
