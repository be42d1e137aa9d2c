#include "daa/errors.hpp"

namespace daa {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::bad_magic: return "BadMagic";
    case ErrorCode::unsupported_version: return "UnsupportedVersion";
    case ErrorCode::truncated_payload: return "TruncatedPayload";
    case ErrorCode::non_finite_value: return "NonFiniteValue";
    case ErrorCode::negative_value: return "NegativeValue";
    case ErrorCode::shape_mismatch: return "ShapeMismatch";
    case ErrorCode::invalid_trajectory: return "InvalidTrajectory";
    case ErrorCode::index_out_of_range: return "IndexOutOfRange";
    case ErrorCode::config_out_of_range: return "ConfigOutOfRange";
    case ErrorCode::solver_stalled: return "SolverStalled";
    case ErrorCode::non_finite_state: return "NonFiniteState";
    case ErrorCode::degenerate_data: return "DegenerateData";
    case ErrorCode::single_class_dataset: return "SingleClassDataset";
    case ErrorCode::length_mismatch: return "LengthMismatch";
    case ErrorCode::invalid_axis_value: return "InvalidAxisValue";
    case ErrorCode::invalid_params: return "InvalidParams";
    case ErrorCode::invalid_manifest: return "InvalidManifest";
    case ErrorCode::io_error: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace daa
