#include "pairjudge/error.hpp"

namespace pairjudge {

std::string_view error_kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EndpointUnreachable: return "EndpointUnreachable";
    case ErrorKind::MalformedResponse: return "MalformedResponse";
    case ErrorKind::RateLimited: return "RateLimited";
    case ErrorKind::CacheCorrupt: return "CacheCorrupt";
    case ErrorKind::LogprobsUnsupported: return "LogprobsUnsupported";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::UnknownFingerprint: return "UnknownFingerprint";
    case ErrorKind::FileMissing: return "FileMissing";
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::EmptyGeneration: return "EmptyGeneration";
    case ErrorKind::UnparseableScore: return "UnparseableScore";
    case ErrorKind::InsufficientCandidates: return "InsufficientCandidates";
    case ErrorKind::PoolTooSmall: return "PoolTooSmall";
    case ErrorKind::EmptyExport: return "EmptyExport";
    case ErrorKind::ZeroProbability: return "ZeroProbability";
    case ErrorKind::VerdictUnparseable: return "VerdictUnparseable";
    case ErrorKind::InconsistentJudgment: return "InconsistentJudgment";
    case ErrorKind::TooFewUnits: return "TooFewUnits";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::TextTooShort: return "TextTooShort";
    case ErrorKind::IndexFormat: return "IndexFormat";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::AllExcluded: return "AllExcluded";
    case ErrorKind::IncompleteMatrix: return "IncompleteMatrix";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::MissingTournament: return "MissingTournament";
    case ErrorKind::KeyMismatch: return "KeyMismatch";
    case ErrorKind::DuplicateItemIds: return "DuplicateItemIds";
    case ErrorKind::TooFewRaters: return "TooFewRaters";
    case ErrorKind::SessionClosed: return "SessionClosed";
    case ErrorKind::OutOfOrderSubmission: return "OutOfOrderSubmission";
    case ErrorKind::InvalidRating: return "InvalidRating";
    case ErrorKind::DuplicateRating: return "DuplicateRating";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::Unauthorized: return "Unauthorized";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace pairjudge
