#include "imagetypes/error.hpp"

namespace imagetypes {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Io: return "Io";
        case ErrorCode::Parse: return "Parse";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::TruncatedPayload: return "TruncatedPayload";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::KTooLarge: return "KTooLarge";
        case ErrorCode::EmptyCluster: return "EmptyCluster";
        case ErrorCode::DegenerateCentroids: return "DegenerateCentroids";
        case ErrorCode::SingleCluster: return "SingleCluster";
        case ErrorCode::RowMismatch: return "RowMismatch";
        case ErrorCode::EmptyDesign: return "EmptyDesign";
        case ErrorCode::InsufficientDof: return "InsufficientDof";
        case ErrorCode::DegenerateRanks: return "DegenerateRanks";
        case ErrorCode::MissingLabel: return "MissingLabel";
        case ErrorCode::MissingScore: return "MissingScore";
    }
    return "Unknown";
}

}  // namespace imagetypes
