#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cmbreak {

enum class ErrorCode : std::uint8_t {
    NonFiniteState,
    DomainError,
    KeyRejected,
    OrbitEscaped,
    LengthMismatch,
    DimensionMismatch,
    AmbiguousPosition,
    OracleMismatch,
    NotBijective,
    CodeOutOfRange,
    SequenceTooShort,
    GeneratorExhausted,
    ParseError,
    IoError,
    UsageError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library. `context` carries machine-readable
/// details (iteration index, position, required length, ...) that the CLI
/// forwards verbatim into its JSON error channel.
class Error : public std::runtime_error {
public:
    using Context = std::map<std::string, std::string>;

    Error(ErrorCode code, const std::string& message, Context context = {});

    ErrorCode code() const noexcept { return code_; }
    const Context& context() const noexcept { return context_; }

private:
    ErrorCode code_;
    Context context_;
};

}  // namespace cmbreak
