#pragma once

#include <stdexcept>
#include <string>

namespace c2calib {

// Failure taxonomy. Geometric codes map to CLI exit code 2, optimization
// failures to 3, input/schema problems to 1.
enum class ErrorCode {
    InvalidInput,
    DegenerateProjection,
    DegenerateConfiguration,
    SingularCamera,
    BehindCamera,
    NoRealSolution,
    NonPositiveDepth,
    DegenerateImages,
    NearDegenerate,
    RayParallelToPlane,
    NotAHomology,
    ComplexEigenspace,
    InconsistentLegs,
    AllEvaluationsFailed,
    VisibilityFailure,
    FitDegenerate,
    InsufficientPoints,
    EmptyOutput,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const { return code_; }

    // True for errors caused by scene/measurement geometry rather than by
    // malformed inputs or optimizer exhaustion.
    bool is_geometric() const {
        return code_ != ErrorCode::InvalidInput && code_ != ErrorCode::AllEvaluationsFailed;
    }

private:
    ErrorCode code_;
};

[[noreturn]] inline void throw_error(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace c2calib
