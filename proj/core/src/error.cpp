#include "faceqa/error.hpp"

namespace faceqa {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::CorruptImage: return "CorruptImage";
        case ErrorCode::InvalidAnnotation: return "InvalidAnnotation";
        case ErrorCode::NoBackground: return "NoBackground";
        case ErrorCode::EmptyComponents: return "EmptyComponents";
        case ErrorCode::UnknownMeasure: return "UnknownMeasure";
        case ErrorCode::MeasureUnavailable: return "MeasureUnavailable";
        case ErrorCode::InvalidEncoding: return "InvalidEncoding";
        case ErrorCode::DuplicateDocId: return "DuplicateDocId";
        case ErrorCode::InvalidChunkParams: return "InvalidChunkParams";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::BackendUnavailable: return "BackendUnavailable";
        case ErrorCode::BackendTimeout: return "BackendTimeout";
        case ErrorCode::NoImageAttached: return "NoImageAttached";
        case ErrorCode::NoImages: return "NoImages";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::EmptyEvaluation: return "EmptyEvaluation";
        case ErrorCode::SessionNotFound: return "SessionNotFound";
        case ErrorCode::BadImage: return "BadImage";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::Busy: return "Busy";
    }
    return "Unknown";
}

}  // namespace faceqa
