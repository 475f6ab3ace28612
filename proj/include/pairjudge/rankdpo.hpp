#pragma once

// Round-robin tournaments over candidate responses, hard/easy reject
// selection, DPO and SFT handoff exports, and win rate against a reference.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pairjudge/core.hpp"
#include "pairjudge/judge.hpp"
#include "pairjudge/synthesis.hpp"

namespace pairjudge::rankdpo {

struct Match {
  std::string a;  // candidate ids, a < b
  std::string b;
  Label result = Label::Tie;  // from a's point of view
  bool inconsistent = false;  // swap disagreement or unparseable; scored as a tie
};

struct TournamentResult {
  std::string sample_id;
  std::map<std::string, int> scores;
  std::vector<std::string> ranking;  // points descending, then id ascending
  std::vector<Match> matches;
  std::size_t decisive = 0;
  std::size_t ties = 0;
};

void to_json(Json& j, const Match& m);
void from_json(const Json& j, Match& m);
void to_json(Json& j, const TournamentResult& t);
void from_json(const Json& j, TournamentResult& t);

/// Scores win 3, tie 1, loss 0 and ranks. Every id in a match must be listed.
TournamentResult score_tournament(const std::string& sample_id, std::vector<std::string> candidate_ids,
                                  const std::vector<Match>& matches);

/// Judges all C(k,2) candidate pairs (ids in sorted order, swap-consistent)
/// with up to `workers` concurrent calls. Throws InsufficientCandidates below 2.
TournamentResult run_tournament(const synthesis::ResponseSet& rs, judge::PairJudge& judge, std::size_t workers = 1);

struct HardEasy {
  std::string hard;
  std::string easy;
};

/// Rank 1 and last rank.
HardEasy select_hard_easy(const TournamentResult& t);

// ---------------------------------------------------------------------------
// DPO

enum class DpoVariant { Plain, Negative, E100, E70H30, Custom };
enum class RejectDifficulty { Easy, Hard, Negative, Random };

struct VariantSpec {
  DpoVariant variant = DpoVariant::E100;
  double hard_ratio = 0.0;  // Custom only; E70H30 means 0.30

  double effective_hard_ratio() const;
  std::string name() const;  // e.g. "CUSTOM(0.30)"
};

/// Accepts PLAIN, NEGATIVE, E100, E70H30, CUSTOM(h) and CUSTOM:h.
VariantSpec parse_variant(std::string_view s);
std::string_view reject_difficulty_name(RejectDifficulty d) noexcept;

struct DpoPair {
  std::string instruction;
  std::string chosen;
  std::string rejected;
  std::string variant;
  RejectDifficulty reject_difficulty = RejectDifficulty::Easy;
  // provenance, not exported
  std::string sample_id;
  std::string rejected_sample_id;
};

void to_json(Json& j, const DpoPair& p);
void from_json(const Json& j, DpoPair& p);

struct DpoResult {
  std::vector<DpoPair> pairs;  // ordered by sample id
  std::vector<std::string> warnings;
};

/// Chosen is each sample's most creative original. Hard rejects use rank 1
/// (rank 2 when rank 1 is the chosen text), easy rejects the last rank (the
/// one above when that is the chosen text). CUSTOM(h) picks llround(h*N)
/// hard samples by seeded shuffle. Throws MissingTournament for ranked
/// variants and PoolTooSmall when NEGATIVE has no other instruction to draw from.
DpoResult build_dpo_dataset(const std::vector<synthesis::ResponseSet>& samples,
                            const std::map<std::string, TournamentResult>& tournaments, const VariantSpec& variant,
                            std::uint64_t rng_seed);

struct SftRecord {
  std::string sample_id;
  std::string instruction;
  std::string response;
};

void to_json(Json& j, const SftRecord& r);

struct SftResult {
  std::vector<SftRecord> records;  // ordered by sample id
  std::vector<std::string> warnings;
};

SftResult export_sft(const std::vector<synthesis::ResponseSet>& samples);

// ---------------------------------------------------------------------------
// Win rate

enum class TieRule { Half, Excluded };

TieRule parse_tie_rule(std::string_view s);

struct WinRateReport {
  std::size_t wins = 0;
  std::size_t ties = 0;
  std::size_t losses = 0;
  std::size_t inconsistent = 0;  // included in ties
  double win_rate = 0.0;
  std::string judge_id;
  TieRule tie_rule = TieRule::Half;
};

void to_json(Json& j, const WinRateReport& r);

/// (wins + ties/2) / total under Half; wins / (wins + losses) under Excluded
/// (0 when there are no decisive outcomes).
double win_rate_value(std::size_t wins, std::size_t ties, std::size_t losses, TieRule rule);

/// Both maps are keyed by instruction. Throws KeyMismatch when the key sets differ.
WinRateReport win_rate(const std::map<std::string, std::string>& candidate,
                       const std::map<std::string, std::string>& reference, judge::PairJudge& judge,
                       TieRule rule = TieRule::Half, std::size_t workers = 1);

}  // namespace pairjudge::rankdpo
