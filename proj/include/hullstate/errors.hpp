#pragma once

#include <stdexcept>
#include <string>

namespace hullstate {

/// Machine-readable failure categories. Every exception thrown by the library
/// carries one of these; the C API and the CLI map them to status codes.
enum class ErrorCode {
    InvalidArgument,
    DuplicateBusId,
    NoSlackBus,
    DisconnectedGraph,
    NonRadialTopology,
    UnitMissing,
    ZeroImpedance,
    UnknownElement,
    UnpairedPQ,
    InsufficientRedundancy,
    DimensionMismatch,
    EmptyIntersection,
    SingularMatrix,
    RankDeficient,
    ContractionFailure,
    NonConvergence,
    IterationCap,
    IoFailure,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const { return code_; }
    const char* code_name() const { return error_code_name(code_); }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace hullstate
