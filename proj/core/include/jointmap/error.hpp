#pragma once

#include <stdexcept>
#include <string>

namespace jointmap {

enum class ErrorCode {
  format,
  unknown_label,
  domain,
  dimension_mismatch,
  duplicate,
  incomplete,
  value,
  degenerate_rate,
  diverged_chain,
  degenerate_chains,
  empty_input,
  not_in_component,
  join,
  io,
};

const char* to_string(ErrorCode code) noexcept;

// All library failures are reported through this type; `code()` tells callers
// which contract was violated without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_{code} {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace jointmap
