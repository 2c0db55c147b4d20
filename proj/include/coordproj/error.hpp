#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coordproj {

enum class ErrorCode {
    EmptySubset,
    Dimension,
    BadExponent,
    BadConstant,
    BadDelta,
    BadEpsilon,
    BadInput,
    SizeCap,
    UnsupportedNorm,
    Io,
};

/// Machine-readable reason string for an error code (used in CLI reports).
constexpr std::string_view reason(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::EmptySubset: return "EMPTY_SUBSET";
    case ErrorCode::Dimension: return "DIMENSION";
    case ErrorCode::BadExponent: return "BAD_EXPONENT";
    case ErrorCode::BadConstant: return "BAD_CONSTANT";
    case ErrorCode::BadDelta: return "BAD_DELTA";
    case ErrorCode::BadEpsilon: return "BAD_EPSILON";
    case ErrorCode::BadInput: return "BAD_INPUT";
    case ErrorCode::SizeCap: return "SIZE_CAP";
    case ErrorCode::UnsupportedNorm: return "UNSUPPORTED_NORM";
    case ErrorCode::Io: return "IO";
    }
    return "UNKNOWN";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(reason(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised when an exhaustive search would exceed its configured cap.
/// `cost` is the size of the search space that was refused.
class SizeCapError : public Error {
public:
    SizeCapError(const std::string& what, double cost)
        : Error(ErrorCode::SizeCap, what), cost_(cost) {}

    double cost() const noexcept { return cost_; }

private:
    double cost_;
};

inline void require(bool ok, ErrorCode code, const std::string& what) {
    if (!ok) throw Error(code, what);
}

} // namespace coordproj
