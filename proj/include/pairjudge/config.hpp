#pragma once

// Run configuration: one TOML file drives every stage. Unknown keys are
// errors; string values may reference the environment as ${VAR} or
// ${VAR:-default}. Relative paths resolve against the config file's directory.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pairjudge/annoservice.hpp"
#include "pairjudge/baselines.hpp"
#include "pairjudge/corpus.hpp"
#include "pairjudge/gateway.hpp"
#include "pairjudge/judge.hpp"
#include "pairjudge/metaeval.hpp"
#include "pairjudge/rankdpo.hpp"
#include "pairjudge/synthesis.hpp"

namespace pairjudge {

struct ModelsConfig {
  std::string instruction;  // instruction generation for response-only sources
  std::string gate;         // creativity gate judge
  std::string enhancer;     // strong creative rewrite for ordinary pairs
  std::string embed;        // DSI and diversity statistics
  std::string ppl;          // perplexity scoring
};

struct BaselineConfig {
  baselines::ScalarVerdictRule rule;
  std::filesystem::path corpus;  // one document per line, or JSONL with a "text" field
  std::filesystem::path index;   // cached index file; empty = <out_dir>/ngram.idx
  std::size_t L = 5;
  std::size_t n_min = 2;
  std::size_t n_max = 8;
  std::optional<text::Unit> unit;  // empty = detect from the corpus
  baselines::Granularity dsi_granularity = baselines::Granularity::Segment;
};

struct AnnoConfig {
  anno::ServerOptions server;
  std::filesystem::path store_dir;  // empty = <out_dir>/anno
  std::size_t snapshot_every = 100;
};

struct RunConfig {
  std::filesystem::path base_dir;  // directory of the config file
  std::uint64_t seed = 42;
  std::filesystem::path out_dir = "out";
  std::filesystem::path templates_dir;

  gateway::GatewayConfig gateway;
  ModelsConfig models;
  std::map<std::string, corpus::SourceConfig> sources;
  std::vector<GeneratorSpec> generators;
  corpus::StandardizeOptions standardize;
  synthesis::AugmentOptions augment;
  synthesis::NegativeOptions negatives;
  synthesis::ExportVariant export_variant = synthesis::ExportVariant::Full;
  judge::JudgeConfig judge;
  metaeval::GoldThresholds gold;
  metaeval::F1Average f1_average = metaeval::F1Average::Macro;
  BaselineConfig baseline;
  rankdpo::VariantSpec dpo_variant{rankdpo::DpoVariant::E70H30, 0.30};
  rankdpo::TieRule tie_rule = rankdpo::TieRule::Half;
  AnnoConfig anno;

  /// Defaults only; gateway settings from the environment.
  static RunConfig defaults();

  /// Throws InvalidConfig for syntax errors, unknown keys, bad values or
  /// unset environment variables, FileMissing when the file does not exist.
  static RunConfig load(const std::filesystem::path& path);
  static RunConfig parse(const std::string& toml_text, const std::filesystem::path& base_dir);

  /// Canonical JSON form with the API key redacted, for manifests.
  Json to_json() const;
  std::string digest() const;

  /// Per-stage seed fanned out from the root seed.
  std::uint64_t stage_seed(std::string_view stage) const;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
};

/// Replaces ${VAR} and ${VAR:-default}. Throws InvalidConfig for an unset
/// variable without a default.
std::string interpolate_env(const std::string& s);

}  // namespace pairjudge
