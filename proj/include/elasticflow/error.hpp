#pragma once

#include <stdexcept>
#include <string>

namespace ef {

// Stable numeric values; mirrored by ef_status in elasticflow.h.
enum class ErrorCode : int {
    TooFewPoints = 1,
    UnequalEdges = 2,
    DegenerateGap = 3,
    ZeroEdgeLength = 4,
    CuspAngle = 5,
    ZeroLengthInput = 6,
    MismatchedN = 7,
    LineSearchFailure = 8,
    NotConverged = 9,
    BoundViolation = 10,
    IndexOutOfRange = 11,
    BadParameters = 12,
    IoError = 13,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace ef
