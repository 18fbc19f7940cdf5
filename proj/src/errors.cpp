#include "casetrain/errors.hpp"

namespace casetrain {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::SchemaError: return "schema_error";
        case ErrorCode::ValueError: return "value_error";
        case ErrorCode::NotFound: return "not_found";
        case ErrorCode::DomainError: return "domain_error";
        case ErrorCode::PreconditionFailed: return "precondition_failed";
        case ErrorCode::InvalidTransition: return "invalid_transition";
        case ErrorCode::Exhausted: return "exhausted";
        case ErrorCode::NoOpMove: return "noop_move";
        case ErrorCode::NotRevealed: return "not_revealed";
        case ErrorCode::WrongKind: return "wrong_kind";
        case ErrorCode::GeometryError: return "geometry_error";
        case ErrorCode::UnknownFactor: return "unknown_factor";
        case ErrorCode::MissingSlot: return "missing_slot";
        case ErrorCode::WrongStep: return "wrong_step";
        case ErrorCode::InvalidScore: return "invalid_score";
        case ErrorCode::ParseError: return "parse_error";
        case ErrorCode::TransportError: return "transport_error";
        case ErrorCode::OracleOnly: return "oracle_only";
        case ErrorCode::CorpusError: return "corpus_error";
        case ErrorCode::ReplayError: return "replay_error";
        case ErrorCode::StorageError: return "storage_error";
        case ErrorCode::IoError: return "io_error";
    }
    return "error";
}

}  // namespace casetrain
