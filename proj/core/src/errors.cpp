#include "cmbreak/errors.hpp"

namespace cmbreak {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonFiniteState: return "NonFiniteState";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::KeyRejected: return "KeyRejected";
        case ErrorCode::OrbitEscaped: return "OrbitEscaped";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::AmbiguousPosition: return "AmbiguousPosition";
        case ErrorCode::OracleMismatch: return "OracleMismatch";
        case ErrorCode::NotBijective: return "NotBijective";
        case ErrorCode::CodeOutOfRange: return "CodeOutOfRange";
        case ErrorCode::SequenceTooShort: return "SequenceTooShort";
        case ErrorCode::GeneratorExhausted: return "GeneratorExhausted";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::UsageError: return "UsageError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, Context context)
    : std::runtime_error(message), code_(code), context_(std::move(context)) {}

}  // namespace cmbreak
