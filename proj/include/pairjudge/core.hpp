#pragma once

// Shared domain types for the whole pipeline. Every type is an immutable-ish
// value object with a canonical JSON form (one object per JSONL line).

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace pairjudge {

using Json = nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Labels

enum class Label { First, Second, Tie };

/// The label that holds after the two responses swap positions.
constexpr Label complement(Label l) noexcept {
  switch (l) {
    case Label::First: return Label::Second;
    case Label::Second: return Label::First;
    case Label::Tie: return Label::Tie;
  }
  return Label::Tie;
}

std::string_view label_name(Label l) noexcept;
Label parse_label(std::string_view s);

// ---------------------------------------------------------------------------
// Samples

enum class SourceKind { ExistingCreative, CreativityDense, OrdinaryPair };  // Type A / B / C
enum class InstructionOrigin { Native, Generated };

std::string_view source_kind_name(SourceKind k) noexcept;
SourceKind parse_source_kind(std::string_view s);

struct Sample {
  std::string id;
  SourceKind source_kind = SourceKind::ExistingCreative;
  std::string source_name;
  std::string domain;
  std::string instruction;
  std::string response;
  InstructionOrigin instruction_origin = InstructionOrigin::Native;
  std::string language;

  bool operator==(const Sample&) const = default;
};

/// Lowercase hex SHA-256 over the length-prefixed (source_name, instruction, response).
std::string sample_id(std::string_view source_name, std::string_view instruction,
                      std::string_view response);

// ---------------------------------------------------------------------------
// Generators and candidates

enum class PromptKind { Ordinary, Creative };

struct Decoding {
  double temperature = 0.7;
  int max_tokens = 1024;
  bool operator==(const Decoding&) const = default;
};

struct GeneratorSpec {
  std::string model_id;
  int tier = 0;  // higher = stronger model
  PromptKind prompt_kind = PromptKind::Ordinary;
  Decoding decoding;
  bool operator==(const GeneratorSpec&) const = default;
};

/// Throws InvalidConfig on a negative tier or one model_id listed with two tiers.
void validate_generator_specs(const std::vector<GeneratorSpec>& specs);

enum class OriginKind {
  HumanOriginal,           // original response of a creative source (Type A/B)
  OrdinaryOriginal,        // native answer of an ordinary pair (Type C)
  EnhancedStrongCreative,  // strong-model creative rewrite for a Type C instruction
  Synth,                   // open-model generation under a GeneratorSpec
};

struct CandidateOrigin {
  OriginKind kind = OriginKind::HumanOriginal;
  std::optional<GeneratorSpec> generator;  // set iff kind == Synth

  static CandidateOrigin human() { return {OriginKind::HumanOriginal, std::nullopt}; }
  static CandidateOrigin ordinary_original() { return {OriginKind::OrdinaryOriginal, std::nullopt}; }
  static CandidateOrigin enhanced() { return {OriginKind::EnhancedStrongCreative, std::nullopt}; }
  static CandidateOrigin synth(GeneratorSpec spec) { return {OriginKind::Synth, std::move(spec)}; }

  bool is_original() const noexcept {
    return kind == OriginKind::HumanOriginal || kind == OriginKind::OrdinaryOriginal;
  }
  bool is_generated() const noexcept { return !is_original(); }

  bool operator==(const CandidateOrigin&) const = default;
};

/// Short stable tag such as "HUMAN_ORIGINAL" or "SYNTH:qwen-14b:CREATIVE".
std::string origin_tag(const CandidateOrigin& origin);

struct ResponseCandidate {
  std::string sample_id;
  std::string text;
  CandidateOrigin origin;
  bool operator==(const ResponseCandidate&) const = default;
};

/// Content-derived id: independent of the candidate's position in any list.
std::string candidate_id(const ResponseCandidate& c);

// ---------------------------------------------------------------------------
// Pairs

enum class PairOrigin { Pseudo, Human, Negative, TiePair };

std::string_view pair_origin_name(PairOrigin o) noexcept;
PairOrigin parse_pair_origin(std::string_view s);

struct PairRecord {
  std::string id;
  std::string instruction;
  std::string r1;
  std::string r2;
  Label label = Label::Tie;
  PairOrigin origin = PairOrigin::Pseudo;
  bool swapped = false;
  std::map<std::string, std::string> metadata;
  bool operator==(const PairRecord&) const = default;
};

/// The same record with r1/r2 exchanged, label complemented and swapped flipped.
/// Metadata keys r1_origin/r2_origin are exchanged too.
PairRecord swap_positions(const PairRecord& p);

/// Deterministic pair id from the instruction, both texts and the swap flag.
std::string pair_id(std::string_view instruction, std::string_view r1, std::string_view r2,
                    bool swapped);

// ---------------------------------------------------------------------------
// JSON

void to_json(Json& j, const Label& l);
void from_json(const Json& j, Label& l);
void to_json(Json& j, const GeneratorSpec& g);
void from_json(const Json& j, GeneratorSpec& g);
void to_json(Json& j, const CandidateOrigin& o);
void from_json(const Json& j, CandidateOrigin& o);
void to_json(Json& j, const Sample& s);
void from_json(const Json& j, Sample& s);
void to_json(Json& j, const ResponseCandidate& c);
void from_json(const Json& j, ResponseCandidate& c);
void to_json(Json& j, const PairRecord& p);
void from_json(const Json& j, PairRecord& p);

}  // namespace pairjudge
