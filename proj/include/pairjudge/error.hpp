#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pairjudge {

enum class ErrorKind {
  // gateway
  EndpointUnreachable,
  MalformedResponse,
  RateLimited,
  CacheCorrupt,
  LogprobsUnsupported,
  EmptyInput,
  DimensionMismatch,
  UnknownFingerprint,
  // corpus
  FileMissing,
  MalformedLine,
  EmptyGeneration,
  UnparseableScore,
  // synthesis
  InsufficientCandidates,
  PoolTooSmall,
  EmptyExport,
  ZeroProbability,
  // judge
  VerdictUnparseable,
  InconsistentJudgment,
  // baselines
  TooFewUnits,
  EmptyCorpus,
  TextTooShort,
  IndexFormat,
  // metaeval
  LengthMismatch,
  AllExcluded,
  IncompleteMatrix,
  DegenerateVariance,
  // rankdpo
  MissingTournament,
  KeyMismatch,
  // annoservice
  DuplicateItemIds,
  TooFewRaters,
  SessionClosed,
  OutOfOrderSubmission,
  InvalidRating,
  DuplicateRating,
  NotFound,
  Unauthorized,
  // config / general
  InvalidConfig,
  InvalidArgument,
  Io,
};

std::string_view error_kind_name(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pairjudge
