#include "jointmap/error.hpp"

namespace jointmap {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::format: return "format";
    case ErrorCode::unknown_label: return "unknown_label";
    case ErrorCode::domain: return "domain";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::duplicate: return "duplicate";
    case ErrorCode::incomplete: return "incomplete";
    case ErrorCode::value: return "value";
    case ErrorCode::degenerate_rate: return "degenerate_rate";
    case ErrorCode::diverged_chain: return "diverged_chain";
    case ErrorCode::degenerate_chains: return "degenerate_chains";
    case ErrorCode::empty_input: return "empty_input";
    case ErrorCode::not_in_component: return "not_in_component";
    case ErrorCode::join: return "join";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace jointmap
