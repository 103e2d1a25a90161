// Shared error type. Every recoverable failure in the library throws
// datefrag::Error with a code from the list below; precondition violations
// (caller bugs) throw std::invalid_argument instead.
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace datefrag {

enum class ErrorCode {
    // calendar / format
    PatternMismatch,
    InvalidCalendarDate,
    OutOfRange,
    NoValidReading,
    // tokeniser definitions
    MalformedDefinition,
    MergeNotInVocab,
    UnknownSymbol,
    SpanMismatch,
    // fragmentation metric
    EmptyVector,
    SourceMismatch,
    DegenerateDesign,
    // benchmark generation
    TemplateMissingPlaceholder,
    IoFailure,
    MalformedLine,
    // judge
    EmptyGold,
    Unparseable,
    EmptyRun,
    NetworkFailure,
    RateLimited,
    AuthFailure,
    // probing
    SingleClass,
    // path tracing
    DimensionMismatch,
    NonFiniteValue,
    TooManyConcepts,
    // statistics / reporting
    ConstantSeries,
    JoinMismatch,
};

// Coarse category, mapped to CLI exit codes (validation 1, io 2, remote 3).
enum class ErrorCategory { Validation, Io, Remote };

constexpr ErrorCategory category_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedDefinition:
        case ErrorCode::IoFailure:
        case ErrorCode::MalformedLine:
            return ErrorCategory::Io;
        case ErrorCode::NetworkFailure:
        case ErrorCode::RateLimited:
        case ErrorCode::AuthFailure:
            return ErrorCategory::Remote;
        default:
            return ErrorCategory::Validation;
    }
}

constexpr std::string_view name_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::PatternMismatch: return "PatternMismatch";
        case ErrorCode::InvalidCalendarDate: return "InvalidCalendarDate";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::NoValidReading: return "NoValidReading";
        case ErrorCode::MalformedDefinition: return "MalformedDefinition";
        case ErrorCode::MergeNotInVocab: return "MergeNotInVocab";
        case ErrorCode::UnknownSymbol: return "UnknownSymbol";
        case ErrorCode::SpanMismatch: return "SpanMismatch";
        case ErrorCode::EmptyVector: return "EmptyVector";
        case ErrorCode::SourceMismatch: return "SourceMismatch";
        case ErrorCode::DegenerateDesign: return "DegenerateDesign";
        case ErrorCode::TemplateMissingPlaceholder: return "TemplateMissingPlaceholder";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::MalformedLine: return "MalformedLine";
        case ErrorCode::EmptyGold: return "EmptyGold";
        case ErrorCode::Unparseable: return "Unparseable";
        case ErrorCode::EmptyRun: return "EmptyRun";
        case ErrorCode::NetworkFailure: return "NetworkFailure";
        case ErrorCode::RateLimited: return "RateLimited";
        case ErrorCode::AuthFailure: return "AuthFailure";
        case ErrorCode::SingleClass: return "SingleClass";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::TooManyConcepts: return "TooManyConcepts";
        case ErrorCode::ConstantSeries: return "ConstantSeries";
        case ErrorCode::JoinMismatch: return "JoinMismatch";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(name_of(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    ErrorCategory category() const noexcept { return category_of(code_); }

  private:
    ErrorCode code_;
};

} // namespace datefrag
