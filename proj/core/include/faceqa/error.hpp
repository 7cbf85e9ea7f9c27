/// @file error.hpp
/// @brief Error type shared by every faceqa module.

#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

namespace faceqa {

/// Every failure raised by the library carries one of these codes. The
/// service layer maps each code to exactly one wire-level ApiError.
enum class ErrorCode {
    // image_quality
    UnsupportedFormat,
    CorruptImage,
    InvalidAnnotation,
    NoBackground,
    EmptyComponents,
    UnknownMeasure,
    MeasureUnavailable,
    // corpus_ingest
    InvalidEncoding,
    DuplicateDocId,
    InvalidChunkParams,
    // embedding / vector_index
    ZeroVector,
    DimensionMismatch,
    // llm_gateway
    BackendUnavailable,
    BackendTimeout,
    // agent_core
    NoImageAttached,
    // eval_harness
    NoImages,
    ParseError,
    EmptyEvaluation,
    // service_api
    SessionNotFound,
    BadImage,
    ValidationError,
    NotFound,
    Busy,
};

inline constexpr std::array kAllErrorCodes = {
    ErrorCode::UnsupportedFormat,  ErrorCode::CorruptImage,
    ErrorCode::InvalidAnnotation,  ErrorCode::NoBackground,
    ErrorCode::EmptyComponents,    ErrorCode::UnknownMeasure,
    ErrorCode::MeasureUnavailable, ErrorCode::InvalidEncoding,
    ErrorCode::DuplicateDocId,     ErrorCode::InvalidChunkParams,
    ErrorCode::ZeroVector,         ErrorCode::DimensionMismatch,
    ErrorCode::BackendUnavailable, ErrorCode::BackendTimeout,
    ErrorCode::NoImageAttached,    ErrorCode::NoImages,
    ErrorCode::ParseError,         ErrorCode::EmptyEvaluation,
    ErrorCode::SessionNotFound,    ErrorCode::BadImage,
    ErrorCode::ValidationError,    ErrorCode::NotFound,
    ErrorCode::Busy,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace faceqa
