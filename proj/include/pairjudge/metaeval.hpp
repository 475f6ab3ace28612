#pragma once

// Agreement statistics for 3-class pairwise verdicts, swap-averaged reports,
// ICC(2,k) over Likert rating matrices and gold-pair derivation.

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pairjudge/core.hpp"
#include "pairjudge/judge.hpp"

namespace pairjudge::metaeval {

/// Rows are gold, columns predicted, both indexed FIRST, SECOND, TIE.
struct Confusion3 {
  std::array<std::array<std::size_t, 3>, 3> counts{};

  std::size_t total() const noexcept;
  std::size_t at(Label gold, Label pred) const noexcept;
  bool operator==(const Confusion3&) const = default;
};

/// Throws LengthMismatch for unequal lengths and EmptyInput for empty lists.
Confusion3 confusion(const std::vector<Label>& pred, const std::vector<Label>& gold);

enum class F1Average { Macro, Weighted };

/// Unweighted mean of per-class F1. A class with no gold and no predicted
/// items scores 0 and still counts towards the mean.
double macro_f1(const Confusion3& c);
/// Per-class F1 weighted by gold support.
double weighted_f1(const Confusion3& c);
double f1(const Confusion3& c, F1Average avg);

/// (p_o - p_e) / (1 - p_e); 0 when p_e == 1.
double cohen_kappa(const Confusion3& c);
double agreement(const Confusion3& c);

/// Fraction of positions where reverse == complement(forward).
double consistency_rate(const std::vector<Label>& forward, const std::vector<Label>& reverse);

struct OrientationMetrics {
  double f1 = 0.0;
  double kappa = 0.0;
  double agreement = 0.0;
  Confusion3 confusion;
  bool operator==(const OrientationMetrics&) const = default;
};

OrientationMetrics orientation_metrics(const std::vector<Label>& pred, const std::vector<Label>& gold,
                                       F1Average avg = F1Average::Macro);

struct MetricReport {
  double macro_f1 = 0.0;  // mean of the two orientations; weighted F1 when so configured
  double kappa = 0.0;
  double agreement = 0.0;
  double consistency = 0.0;
  std::size_t scored = 0;
  std::size_t excluded_unparseable = 0;
  F1Average f1_average = F1Average::Macro;
  OrientationMetrics forward;
  OrientationMetrics reverse;
};

void to_json(Json& j, const MetricReport& r);
void from_json(const Json& j, MetricReport& r);

/// Fixed-width text table of a report.
std::string format_report(const MetricReport& r, const std::string& title);

// ---------------------------------------------------------------------------
// Gold pairs

enum class GoldLabel { First, Second, Tie, Excluded };

std::string_view gold_label_name(GoldLabel g) noexcept;
GoldLabel parse_gold_label(std::string_view s);
std::optional<Label> to_verdict(GoldLabel g) noexcept;

struct GoldPair {
  std::string pair_id;
  std::string group;
  std::string instruction;
  std::string r1;
  std::string r2;
  double mean1 = 0.0;
  double mean2 = 0.0;
  GoldLabel label = GoldLabel::Excluded;
};

void to_json(Json& j, const GoldPair& g);
void from_json(const Json& j, GoldPair& g);

struct GoldThresholds {
  double distinct = 0.3;  // |diff| above this is labelled by sign
  double tie = 0.1;       // |diff| below this is a tie
  double epsilon = 1e-9;  // diffs within epsilon of either threshold count as on it
};

/// Applies the thresholds with strict inequalities; diffs on a threshold
/// (within epsilon) are EXCLUDED.
GoldLabel gold_label(double mean1, double mean2, const GoldThresholds& th = {});

struct ScoredItem {
  std::string item_id;
  std::string group;
  std::string instruction;
  std::string response;
  double mean = 0.0;
};

using ItemPairing = std::vector<std::pair<std::string, std::string>>;

/// Unknown item ids and pairs spanning two instructions throw InvalidArgument.
std::vector<GoldPair> derive_gold_pairs(const std::map<std::string, ScoredItem>& table, const ItemPairing& pairing,
                                        const GoldThresholds& th = {});

/// Every unordered pair within each group, in item-id order.
ItemPairing pair_all_within_group(const std::map<std::string, ScoredItem>& table);

/// At most `per_group` pairs per group, sampled with a seeded shuffle.
ItemPairing pair_sample_within_group(const std::map<std::string, ScoredItem>& table, std::size_t per_group,
                                     std::uint64_t seed);

// ---------------------------------------------------------------------------
// Swap-averaged evaluation

/// Returns an empty optional when the verdict cannot be parsed.
using Evaluator =
    std::function<std::optional<Label>(const std::string& instruction, const std::string& r1, const std::string& r2)>;

/// Evaluates every non-excluded pair in both orientations (gold complemented
/// for the reverse one) and averages the per-orientation metrics. Pairs with
/// either orientation unparseable are counted in excluded_unparseable.
/// Throws AllExcluded when nothing is left to score.
MetricReport swap_averaged_report(const Evaluator& evaluator, const std::vector<GoldPair>& pairs,
                                  F1Average avg = F1Average::Macro);

/// Adapter from a PairJudge.
Evaluator evaluator_from(judge::PairJudge& judge);

/// Same computation from already-collected verdicts.
struct SwapVerdicts {
  std::optional<Label> forward;
  std::optional<Label> reverse;
};

MetricReport report_from_verdicts(const std::vector<GoldPair>& pairs, const std::vector<SwapVerdicts>& verdicts,
                                  F1Average avg = F1Average::Macro);

struct EvalResult {
  MetricReport overall;                        // pooled over all pairs
  std::map<std::string, MetricReport> groups;  // per gold group
  MetricReport group_mean;                     // unweighted mean of per-group metrics
};

void to_json(Json& j, const EvalResult& r);

/// Joins a verdict dump with gold pairs on pair_id. Every non-excluded gold
/// pair needs a forward and a reverse row (KeyMismatch otherwise).
EvalResult evaluate_dump(const std::vector<judge::DumpRow>& rows, const std::vector<GoldPair>& gold,
                         F1Average avg = F1Average::Macro);

// ---------------------------------------------------------------------------
// Inter-rater reliability

/// items x raters; NaN marks a missing rating.
using RatingMatrix = std::vector<std::vector<double>>;

/// Two-way random, average-measures ICC(2,k). Throws IncompleteMatrix for
/// ragged or missing cells (or fewer than 2 items or raters) and
/// DegenerateVariance when the denominator vanishes.
double icc_2k(const RatingMatrix& m);

}  // namespace pairjudge::metaeval
