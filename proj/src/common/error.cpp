#include "privlocker/error.hpp"

namespace privlocker {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::malformed_encoding: return "malformed_encoding";
    case ErrorCode::off_group_point: return "off_group_point";
    case ErrorCode::entropy_failure: return "entropy_failure";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::threshold_out_of_range: return "threshold_out_of_range";
    case ErrorCode::empty_gate: return "empty_gate";
    case ErrorCode::empty_attribute_set: return "empty_attribute_set";
    case ErrorCode::overlapping_tokens: return "overlapping_tokens";
    case ErrorCode::policy_not_satisfied: return "policy_not_satisfied";
    case ErrorCode::authentication_failed: return "authentication_failed";
    case ErrorCode::not_initialized: return "not_initialized";
    case ErrorCode::already_initialized: return "already_initialized";
    case ErrorCode::duplicate_issuer: return "duplicate_issuer";
    case ErrorCode::unknown_issuer: return "unknown_issuer";
    case ErrorCode::unknown_attribute: return "unknown_attribute";
    case ErrorCode::unknown_identity: return "unknown_identity";
    case ErrorCode::missing_issuer_attributes: return "missing_issuer_attributes";
    case ErrorCode::no_covering_key: return "no_covering_key";
    case ErrorCode::unknown_uri: return "unknown_uri";
    case ErrorCode::wrong_doctype: return "wrong_doctype";
    case ErrorCode::version_mismatch: return "version_mismatch";
    case ErrorCode::checksum_mismatch: return "checksum_mismatch";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::not_implemented: return "not_implemented";
    case ErrorCode::expectation_failed: return "expectation_failed";
  }
  return "unknown";
}

std::optional<ErrorCode> error_code_from_name(std::string_view name) noexcept {
  for (int i = 0; i <= static_cast<int>(ErrorCode::expectation_failed); ++i) {
    const auto code = static_cast<ErrorCode>(i);
    if (error_code_name(code) == name) return code;
  }
  return std::nullopt;
}

int exit_code_for(ErrorCode code) noexcept {
  return 10 + static_cast<int>(code);
}

}  // namespace privlocker
