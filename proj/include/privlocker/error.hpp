#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace privlocker {

// Stable error taxonomy shared by every module. The names returned by
// error_code_name() are part of the CLI contract and must not change.
enum class ErrorCode {
  invalid_argument,
  malformed_encoding,
  off_group_point,
  entropy_failure,
  parse_error,
  threshold_out_of_range,
  empty_gate,
  empty_attribute_set,
  overlapping_tokens,
  policy_not_satisfied,
  authentication_failed,
  not_initialized,
  already_initialized,
  duplicate_issuer,
  unknown_issuer,
  unknown_attribute,
  unknown_identity,
  missing_issuer_attributes,
  no_covering_key,
  unknown_uri,
  wrong_doctype,
  version_mismatch,
  checksum_mismatch,
  io_error,
  not_implemented,
  expectation_failed,
};

std::string_view error_code_name(ErrorCode code) noexcept;
std::optional<ErrorCode> error_code_from_name(std::string_view name) noexcept;

// Process exit status for the CLI; 0 is reserved for success.
int exit_code_for(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace privlocker
