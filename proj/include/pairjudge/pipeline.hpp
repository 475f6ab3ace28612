#pragma once

// Pipeline stages over JSONL interchange files in the run's output
// directory. The CLI is a thin argument layer over these functions.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pairjudge/config.hpp"
#include "pairjudge/gateway.hpp"
#include "pairjudge/metaeval.hpp"
#include "pairjudge/templates.hpp"

namespace pairjudge::pipeline {

inline constexpr const char* kToolVersion = "0.3.0";

/// Well-known file names inside out_dir.
namespace files {
inline constexpr const char* kRaw = "raw.jsonl";
inline constexpr const char* kIngestBadLines = "ingest_bad_lines.jsonl";
inline constexpr const char* kSamples = "samples.jsonl";
inline constexpr const char* kStandardizeReport = "standardize_report.jsonl";
inline constexpr const char* kResponseSets = "response_sets.jsonl";
inline constexpr const char* kAugmentReport = "augment_report.jsonl";
inline constexpr const char* kPairs = "pairs.jsonl";
inline constexpr const char* kTraining = "training.jsonl";
inline constexpr const char* kLabelCounts = "label_counts.json";
inline constexpr const char* kVerdicts = "verdicts.jsonl";
inline constexpr const char* kMetricReport = "metric_report.json";
inline constexpr const char* kTournaments = "tournaments.jsonl";
inline constexpr const char* kDpo = "dpo.jsonl";
inline constexpr const char* kSft = "sft.jsonl";
inline constexpr const char* kWinRate = "win_rate.json";
inline constexpr const char* kReport = "report.json";
inline constexpr const char* kManifest = "run.manifest.json";
}  // namespace files

class Context {
 public:
  Context(RunConfig cfg, std::optional<std::filesystem::path> mock_script = std::nullopt);

  const RunConfig& config() const noexcept { return cfg_; }
  const TemplateSet& templates() const noexcept { return templates_; }

  /// The mock gateway when a script was given, the HTTP gateway otherwise.
  /// Built on first use, so offline stages never need endpoint settings.
  std::shared_ptr<gateway::Gateway> gateway();
  bool gateway_used() const noexcept { return gw_ != nullptr; }
  /// Injects a ready gateway (fixture authoring, tests).
  void use_gateway(std::shared_ptr<gateway::Gateway> gw) { gw_ = std::move(gw); }

  std::filesystem::path out(const std::string& name) const;

  /// Records a file read or written by the current stage (digest taken now).
  void input(const std::filesystem::path& p);
  void output(const std::filesystem::path& p);

  /// Writes the stage entry of run.manifest.json and resets the file lists.
  void finish_stage(const std::string& stage, const Json& summary);

 private:
  std::string display(const std::filesystem::path& p) const;

  RunConfig cfg_;
  std::optional<std::filesystem::path> mock_;
  TemplateSet templates_;
  std::shared_ptr<gateway::Gateway> gw_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
};

// Every stage returns a short JSON summary and records its manifest entry.

Json run_ingest(Context& ctx);
Json run_standardize(Context& ctx);
Json run_augment(Context& ctx);
/// Pairs, negatives and the training export for `variant` (config default when empty).
Json run_label(Context& ctx, std::optional<synthesis::ExportVariant> variant = std::nullopt);
Json run_judge(Context& ctx, const std::filesystem::path& gold);
/// Offline recomputation: no gateway is constructed.
metaeval::EvalResult run_eval(Context& ctx, const std::filesystem::path& verdicts, const std::filesystem::path& gold);
Json run_win_rate(Context& ctx, const std::filesystem::path& candidate, const std::filesystem::path& reference);
Json run_baseline(Context& ctx, const std::filesystem::path& gold, std::optional<baselines::Metric> metric);
Json run_tournament(Context& ctx);
Json run_dpo_export(Context& ctx, std::optional<rankdpo::VariantSpec> variant = std::nullopt);
Json run_report(Context& ctx);

/// Reads gold pairs. Rows without a label are labelled from mean1/mean2 under
/// the thresholds; rows with neither are MalformedLine.
std::vector<metaeval::GoldPair> read_gold(const std::filesystem::path& path, const metaeval::GoldThresholds& th);

/// One document per non-blank line, or the "text" field of JSONL objects.
std::vector<std::string> read_corpus(const std::filesystem::path& path);

}  // namespace pairjudge::pipeline
