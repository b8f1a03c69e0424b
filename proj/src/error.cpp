// SPDX-License-Identifier: Apache-2.0
#include "hems/error.hpp"

namespace hems {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::config: return "config_error";
    case ErrorCode::parse: return "parse_error";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::provider: return "provider_error";
    case ErrorCode::state: return "wrong_state";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::budget_exhausted: return "budget_exhausted";
    }
    return "unknown";
}

} // namespace hems
