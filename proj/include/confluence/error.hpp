#pragma once

#include <stdexcept>
#include <string>

namespace confluence {

enum class ErrorCode {
    pole,
    parameter_degenerate,
    extrapolation_unstable,
    out_of_disk,
    sector_mismatch,
    basis_invalid,
    series_unreachable,
    coefficient_pole,
    indeterminate_zero_over_zero,
    singular_transform,
    continuation_failure,
    singular_direction,
    quadrature_nonconvergent,
    step_underflow,
    ill_conditioned_basis,
    blow_up,
    on_cut,
    config_invalid,
    branch_disagreement,
    degenerate_parameters,
    basis_zero,
    domain
};

inline const char* to_string(ErrorCode c) {
    switch (c) {
    case ErrorCode::pole: return "pole";
    case ErrorCode::parameter_degenerate: return "parameter_degenerate";
    case ErrorCode::extrapolation_unstable: return "extrapolation_unstable";
    case ErrorCode::out_of_disk: return "out_of_disk";
    case ErrorCode::sector_mismatch: return "sector_mismatch";
    case ErrorCode::basis_invalid: return "basis_invalid";
    case ErrorCode::series_unreachable: return "series_unreachable";
    case ErrorCode::coefficient_pole: return "coefficient_pole";
    case ErrorCode::indeterminate_zero_over_zero: return "indeterminate_zero_over_zero";
    case ErrorCode::singular_transform: return "singular_transform";
    case ErrorCode::continuation_failure: return "continuation_failure";
    case ErrorCode::singular_direction: return "singular_direction";
    case ErrorCode::quadrature_nonconvergent: return "quadrature_nonconvergent";
    case ErrorCode::step_underflow: return "step_underflow";
    case ErrorCode::ill_conditioned_basis: return "ill_conditioned_basis";
    case ErrorCode::blow_up: return "blow_up";
    case ErrorCode::on_cut: return "on_cut";
    case ErrorCode::config_invalid: return "config_invalid";
    case ErrorCode::branch_disagreement: return "branch_disagreement";
    case ErrorCode::degenerate_parameters: return "degenerate_parameters";
    case ErrorCode::basis_zero: return "basis_zero";
    case ErrorCode::domain: return "domain";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode c, const std::string& what)
        : std::runtime_error(std::string(to_string(c)) + ": " + what), code_(c) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace confluence
