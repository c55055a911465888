#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ebm {

/// Machine-readable failure categories. The CLI reports these verbatim.
enum class ErrorCode {
    invalid_model,
    invalid_argument,
    pole,
    bracket_failure,
    deflation_failure,
    non_convergence,
    unsupported_configuration,
    degenerate_pair,
    inconsistent_clusters,
    recovery_invalid,
    conjugate_closure,
    infeasible_fit,
    config_error,
    io_error,
    tolerance_exceeded,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_model: return "invalid_model";
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::pole: return "pole";
        case ErrorCode::bracket_failure: return "bracket_failure";
        case ErrorCode::deflation_failure: return "deflation_failure";
        case ErrorCode::non_convergence: return "non_convergence";
        case ErrorCode::unsupported_configuration: return "unsupported_configuration";
        case ErrorCode::degenerate_pair: return "degenerate_pair";
        case ErrorCode::inconsistent_clusters: return "inconsistent_clusters";
        case ErrorCode::recovery_invalid: return "recovery_invalid";
        case ErrorCode::conjugate_closure: return "conjugate_closure";
        case ErrorCode::infeasible_fit: return "infeasible_fit";
        case ErrorCode::config_error: return "config_error";
        case ErrorCode::io_error: return "io_error";
        case ErrorCode::tolerance_exceeded: return "tolerance_exceeded";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace ebm
