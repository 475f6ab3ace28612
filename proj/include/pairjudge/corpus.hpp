#pragma once

// Multi-source ingest and standardization into unified (instruction, response)
// samples: instruction generation for response-only sources, quality filters
// and the 1..6 creativity gate.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pairjudge/core.hpp"
#include "pairjudge/gateway.hpp"
#include "pairjudge/jsonl.hpp"
#include "pairjudge/templates.hpp"

namespace pairjudge::corpus {

struct RawRecord {
  std::string source_name;
  std::map<std::string, std::string> payload;
  SourceKind kind_hint = SourceKind::ExistingCreative;
  std::size_t line = 0;

  std::string record_id() const { return source_name + ":" + std::to_string(line); }
};

void to_json(Json& j, const RawRecord& r);
void from_json(const Json& j, RawRecord& r);

struct IngestResult {
  std::vector<RawRecord> records;
  std::vector<jsonl::BadLine> bad_lines;  // MalformedLine accounting
};

/// One RawRecord per JSON-object line. Non-object or empty-object lines are
/// reported with their line numbers. Throws FileMissing.
IngestResult ingest(const std::filesystem::path& path, const std::string& source_name, SourceKind kind);

/// Per-source field map, the `[sources.<name>]` config section.
struct SourceConfig {
  std::string name;
  std::filesystem::path path;
  SourceKind kind = SourceKind::ExistingCreative;
  std::string instruction_field = "instruction";  // empty: response-only source
  std::string response_field = "response";
  std::string domain;        // default: source name
  std::string domain_field;  // per-record domain overrides `domain` when present
  std::string language;      // empty: auto-detect ("zh" for CJK text, else "en")
  bool generate_instruction = false;  // also regenerate native instructions (Type B always does)
};

// ---------------------------------------------------------------------------
// Filters

enum class FilterReason { Ok, TooShort, TooLong, RepeatedPhrase, ResponseSubstring, LowCreativityScore };

std::string_view filter_reason_name(FilterReason r) noexcept;

struct FilterVerdict {
  bool accepted = true;
  FilterReason reason = FilterReason::Ok;
  bool operator==(const FilterVerdict&) const = default;

  static FilterVerdict ok() { return {true, FilterReason::Ok}; }
  static FilterVerdict reject(FilterReason r) { return {false, r}; }
};

struct FilterLimits {
  std::size_t instruction_min = 5;
  std::size_t instruction_max = 300;
  std::size_t response_min = 2;
  std::size_t response_max = 8000;
  std::size_t repeat_ngram = 2;  // shortest n-gram considered
  std::size_t repeat_count = 3;  // occurrences that trigger rejection
};

/// True when some n-gram with n >= min_n occurs at least min_count times in
/// `text` (units auto-detected, overlapping occurrences counted).
bool has_repeated_phrase(std::string_view text, std::size_t min_n, std::size_t min_count);

/// Checks in fixed order: lengths (code points), repeated phrase in the
/// instruction, instruction containing the trimmed response.
FilterVerdict filter_pair(std::string_view instruction, std::string_view response,
                          const FilterLimits& limits);

// ---------------------------------------------------------------------------
// Creativity gate

struct CreativityGate {
  int score = 1;  // 1..6
  std::string analysis;
  int threshold = 4;
  bool passed() const noexcept { return score > threshold; }
};

/// Strict JSON {analysis, score} first (code fences tolerated), then a regex
/// fallback for `"score": <int>`. Throws UnparseableScore; never guesses.
CreativityGate parse_gate_reply(const std::string& raw, int threshold);

struct ModelCall {
  std::string model_id;
  double temperature = 0.0;
  int max_tokens = 512;
  std::optional<std::int64_t> seed;
};

/// Text shown to the gate judge for one pair.
std::string gate_text(std::string_view instruction, std::string_view response);

CreativityGate gate_creativity(std::string_view instruction, std::string_view response,
                               gateway::Gateway& gw, const std::string& gate_template,
                               const std::string& category, const ModelCall& call, int threshold);

/// Asks the generator for a plausible instruction; trims whitespace and quote
/// wrappers. Throws EmptyGeneration when nothing is left.
std::string generate_instruction(std::string_view response, gateway::Gateway& gw,
                                 const std::string& instruction_template, const ModelCall& call);

// ---------------------------------------------------------------------------
// Standardization

struct StandardizeOptions {
  FilterLimits limits;
  int gate_threshold = 4;
  std::string instruction_model;
  std::string gate_model;
  double generation_temperature = 0.7;
  int generation_max_tokens = 256;
  std::set<SourceKind> gated_kinds{SourceKind::ExistingCreative, SourceKind::CreativityDense};
  std::uint64_t seed = 0;
  std::size_t concurrency = 4;
};

enum class RecordStatus { Emitted, Filtered, Errored };

struct ReportRow {
  std::string record_id;
  RecordStatus status = RecordStatus::Emitted;
  FilterReason reason = FilterReason::Ok;
  std::string error;  // error kind name when Errored
  std::string detail;
  std::string sample_id;
  std::optional<int> score;
};

void to_json(Json& j, const ReportRow& r);

struct StandardizeResult {
  std::vector<Sample> samples;  // input order
  std::vector<ReportRow> report;  // exactly one row per input record, input order
};

StandardizeResult standardize(const std::vector<RawRecord>& records,
                              const std::map<std::string, SourceConfig>& sources,
                              gateway::Gateway& gw, const TemplateSet& templates,
                              const StandardizeOptions& options);

/// Seed for a gateway call, kept in the positive int63 range so every
/// OpenAI-compatible server accepts it.
std::int64_t call_seed(std::uint64_t root, std::string_view label);

}  // namespace pairjudge::corpus
