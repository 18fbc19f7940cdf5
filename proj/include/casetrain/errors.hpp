#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace casetrain {

/// Machine-readable error codes surfaced through the CLI and the HTTP API.
enum class ErrorCode {
    SchemaError,         ///< Malformed or mistyped case/script document
    ValueError,          ///< Well-formed document violating a field constraint
    NotFound,            ///< Unresolvable id, path segment, or reference
    DomainError,         ///< Input outside an operation's domain
    PreconditionFailed,  ///< Operation guard not met in the current state
    InvalidTransition,   ///< Step machine already at its final state
    Exhausted,           ///< No evidence packets left to reveal
    NoOpMove,            ///< Diagnosis move to the entry's current category
    NotRevealed,         ///< Annotation on a packet not yet revealed
    WrongKind,           ///< Packet kind unsuitable for the operation
    GeometryError,       ///< Annotation coordinates outside [0,1]
    UnknownFactor,       ///< Mind-map factor outside the four branches
    MissingSlot,         ///< Prompting-question slot with no binding
    WrongStep,           ///< Report requested before the final step
    InvalidScore,        ///< Rater score outside 0..7 or criterion missing
    ParseError,          ///< Unparseable model reply or document
    TransportError,      ///< Model endpoint unreachable or timed out
    OracleOnly,          ///< Model adapter disabled by configuration
    CorpusError,         ///< Corpus manifest or case failed to load
    ReplayError,         ///< Corrupt session action log
    StorageError,        ///< Filesystem write/fsync failure
    IoError,             ///< Generic read failure outside the store
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, std::string detail = "")
        : std::runtime_error(std::move(message)),
          code_(code),
          detail_(std::move(detail)) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace casetrain
