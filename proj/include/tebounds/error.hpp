#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tebounds {

enum class ErrorCode {
    MalformedRow,
    EmptyArm,
    DuplicateId,
    Undefined,
    TooManyDegenerate,
    DomainError,
    ZeroVariance,
    Infeasible,
    InvalidParams,
    Io,
    Usage,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::EmptyArm: return "EmptyArm";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::Undefined: return "Undefined";
        case ErrorCode::TooManyDegenerate: return "TooManyDegenerate";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::ZeroVariance: return "ZeroVariance";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::Io: return "Io";
        case ErrorCode::Usage: return "Usage";
    }
    return "Unknown";
}

// Every module reports failures through this one exception type; the code is
// what callers (and the CLI error record) dispatch on.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line = std::nullopt)
        : std::runtime_error(message), code_(code), line_(line) {}

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> line() const noexcept { return line_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> line_;
};

}  // namespace tebounds
