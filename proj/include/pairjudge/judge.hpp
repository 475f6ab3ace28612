#pragma once

// Pairwise creativity judging: prompt rendering, verdict parsing, swap-order
// consistency and comparison against a reference response.

#include <memory>
#include <optional>
#include <string>

#include "pairjudge/core.hpp"
#include "pairjudge/gateway.hpp"
#include "pairjudge/templates.hpp"

namespace pairjudge::judge {

enum class ParseMode { StrictTag, PatternFallback };
enum class ParsePath { Tag, Pattern, Failed };

std::string_view parse_path_name(ParsePath p) noexcept;
ParsePath parse_parse_path(std::string_view s);

struct JudgeConfig {
  std::string model_id;
  std::string template_id = "judge";
  double temperature = 0.0;
  ParseMode parse_mode = ParseMode::PatternFallback;
  int max_tokens = 512;
  std::string language = "en";

  /// Judging is deterministic: any temperature other than 0 is InvalidConfig.
  void validate() const;
};

struct JudgeOutcome {
  std::optional<Label> verdict;  // empty iff parse_path == Failed
  std::string rationale;
  std::string raw;
  ParsePath parse_path = ParsePath::Failed;

  bool ok() const noexcept { return verdict.has_value(); }
  /// Throws VerdictUnparseable for a failed parse. Never maps a failure to TIE.
  Label verdict_or_throw() const;
};

/// Final `VERDICT: 1|2|TIE` line first (last occurrence wins); with
/// PatternFallback also free text such as "Response 2 is more creative".
/// Conflicting free-text signals fail the parse.
JudgeOutcome parse_verdict(const std::string& raw, ParseMode mode);

std::string render_judge_prompt(const std::string& tmpl, const std::string& instruction, const std::string& r1,
                                const std::string& r2);

/// Anything that can judge one ordered pair.
class PairJudge {
 public:
  virtual ~PairJudge() = default;
  virtual JudgeOutcome judge(const std::string& instruction, const std::string& r1, const std::string& r2) = 0;
  virtual std::string id() const = 0;
};

/// An LLM behind the gateway, called at temperature 0.
class LlmJudge : public PairJudge {
 public:
  LlmJudge(JudgeConfig cfg, std::shared_ptr<gateway::Gateway> gw, const TemplateSet& templates);
  JudgeOutcome judge(const std::string& instruction, const std::string& r1, const std::string& r2) override;
  std::string id() const override { return cfg_.model_id; }

 private:
  JudgeConfig cfg_;
  std::shared_ptr<gateway::Gateway> gw_;
  std::string template_;
};

JudgeOutcome judge_pair(const std::string& instruction, const std::string& r1, const std::string& r2,
                        const JudgeConfig& cfg, gateway::Gateway& gw, const TemplateSet& templates);

struct SwapJudgment {
  JudgeOutcome forward;
  JudgeOutcome reverse;  // judged on (r2, r1)
  bool consistent = false;
  bool errored = false;  // either side unparseable; excluded from agreement metrics

  /// The forward verdict when consistent; otherwise empty.
  std::optional<Label> agreed() const;
};

constexpr bool is_consistent(Label forward, Label reverse) noexcept { return reverse == complement(forward); }

SwapJudgment judge_with_swap(PairJudge& judge, const std::string& instruction, const std::string& r1,
                             const std::string& r2);

/// Verdict of `response` (slot 1) against `reference` (slot 2) under the
/// swap-consistent majority rule. Throws InconsistentJudgment when the two
/// orientations disagree and VerdictUnparseable when either cannot be read.
Label compare_to_reference(PairJudge& judge, const std::string& instruction, const std::string& response,
                           const std::string& reference);

// ---------------------------------------------------------------------------
// Verdict dumps: the interchange format for offline metric recomputation.

enum class Orientation { Forward, Reverse };

struct DumpRow {
  std::string pair_id;
  Orientation orientation = Orientation::Forward;
  std::optional<Label> verdict;
  ParsePath parse_path = ParsePath::Failed;
  std::string raw;
};

void to_json(Json& j, const DumpRow& r);
void from_json(const Json& j, DumpRow& r);

std::vector<DumpRow> dump_rows(const std::string& pair_id, const SwapJudgment& sj);

}  // namespace pairjudge::judge
