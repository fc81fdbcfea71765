#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace imagetypes {

enum class ErrorCode {
    Io,
    Parse,
    BadMagic,
    TruncatedPayload,
    DimensionMismatch,
    NonFinite,
    InvalidArgument,
    KTooLarge,
    EmptyCluster,
    DegenerateCentroids,
    SingleCluster,
    RowMismatch,
    EmptyDesign,
    InsufficientDof,
    DegenerateRanks,
    MissingLabel,
    MissingScore,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-checkable code. Every failure the library
/// reports to callers goes through this type.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace imagetypes
