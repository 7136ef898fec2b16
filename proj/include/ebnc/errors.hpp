#pragma once

#include <stdexcept>
#include <string>

namespace ebnc {

// Error categories surfaced by the library. The CLI maps each code to a
// distinct process exit status.
enum class ErrorCode {
    CycleDetected,
    CptShapeMismatch,
    RowNotNormalized,
    ProbabilityOutOfInterior,
    PartialConfiguration,
    InvalidIndex,
    CapExceeded,
    NonBinaryVariable,
    TriangularizationFailed,
    BasisMismatch,
    UnknownLabel,
    MissingValue,
    SchemaMismatch,
    InvalidAlpha,
    TooLarge,
    ParseError,
    InvalidArgument,
    EmptyData,
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::CycleDetected: return "CycleDetected";
        case ErrorCode::CptShapeMismatch: return "CptShapeMismatch";
        case ErrorCode::RowNotNormalized: return "RowNotNormalized";
        case ErrorCode::ProbabilityOutOfInterior: return "ProbabilityOutOfInterior";
        case ErrorCode::PartialConfiguration: return "PartialConfiguration";
        case ErrorCode::InvalidIndex: return "InvalidIndex";
        case ErrorCode::CapExceeded: return "CapExceeded";
        case ErrorCode::NonBinaryVariable: return "NonBinaryVariable";
        case ErrorCode::TriangularizationFailed: return "TriangularizationFailed";
        case ErrorCode::BasisMismatch: return "BasisMismatch";
        case ErrorCode::UnknownLabel: return "UnknownLabel";
        case ErrorCode::MissingValue: return "MissingValue";
        case ErrorCode::SchemaMismatch: return "SchemaMismatch";
        case ErrorCode::InvalidAlpha: return "InvalidAlpha";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::EmptyData: return "EmptyData";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace ebnc
