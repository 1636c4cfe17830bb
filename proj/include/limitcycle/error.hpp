// error.hpp: error codes and the single exception type thrown by the library.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace limitcycle {

enum class ErrorCode {
    invalid_cutoff,
    cutoff_mismatch,
    invalid_frequency,
    invalid_parameter,
    truncation_inadequate,
    unsupported_model_regime,
    unsupported_parameter_regime,
    undefined_ratio,
    not_applicable,
    validation,
    degenerate_steady_state,
    integration_failure,
    instability,
    precision_failure,
    resource_limit,
};

// Coarse grouping used for CLI exit codes.
enum class ErrorCategory { validation, numerical, resource };

inline constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_cutoff: return "invalid-cutoff";
        case ErrorCode::cutoff_mismatch: return "cutoff-mismatch";
        case ErrorCode::invalid_frequency: return "invalid-frequency";
        case ErrorCode::invalid_parameter: return "invalid-parameter";
        case ErrorCode::truncation_inadequate: return "truncation-inadequate";
        case ErrorCode::unsupported_model_regime: return "unsupported-model-regime";
        case ErrorCode::unsupported_parameter_regime: return "unsupported-parameter-regime";
        case ErrorCode::undefined_ratio: return "undefined-ratio";
        case ErrorCode::not_applicable: return "not-applicable";
        case ErrorCode::validation: return "validation";
        case ErrorCode::degenerate_steady_state: return "degenerate-steady-state";
        case ErrorCode::integration_failure: return "integration-failure";
        case ErrorCode::instability: return "instability";
        case ErrorCode::precision_failure: return "precision-failure";
        case ErrorCode::resource_limit: return "resource-limit";
    }
    return "unknown";
}

inline constexpr ErrorCategory category_of(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::degenerate_steady_state:
        case ErrorCode::integration_failure:
        case ErrorCode::instability:
        case ErrorCode::precision_failure:
            return ErrorCategory::numerical;
        case ErrorCode::resource_limit:
            return ErrorCategory::resource;
        default:
            return ErrorCategory::validation;
    }
}

inline constexpr std::string_view to_string(ErrorCategory cat) noexcept {
    switch (cat) {
        case ErrorCategory::validation: return "validation";
        case ErrorCategory::numerical: return "numerical";
        case ErrorCategory::resource: return "resource";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    ErrorCategory category() const noexcept { return category_of(code_); }

private:
    ErrorCode code_;
};

namespace detail {
inline void require(bool ok, ErrorCode code, const std::string& what) {
    if (!ok) throw Error(code, what);
}
}  // namespace detail

}  // namespace limitcycle
