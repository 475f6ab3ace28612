#include "pairjudge/rankdpo.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <regex>
#include <set>
#include <sstream>

#include "pairjudge/error.hpp"
#include "pairjudge/parallel.hpp"
#include "pairjudge/rng.hpp"
#include "pairjudge/text.hpp"

namespace pairjudge::rankdpo {

void to_json(Json& j, const Match& m) {
  j = Json{{"a", m.a}, {"b", m.b}, {"result", m.result}, {"inconsistent", m.inconsistent}};
}

void from_json(const Json& j, Match& m) {
  m.a = j.at("a").get<std::string>();
  m.b = j.at("b").get<std::string>();
  m.result = j.at("result").get<Label>();
  m.inconsistent = j.value("inconsistent", false);
}

void to_json(Json& j, const TournamentResult& t) {
  j = Json{{"sample_id", t.sample_id}, {"scores", t.scores},     {"ranking", t.ranking},
           {"matches", t.matches},     {"decisive", t.decisive}, {"ties", t.ties}};
}

void from_json(const Json& j, TournamentResult& t) {
  std::vector<std::string> ids;
  for (const auto& [id, _] : j.at("scores").items()) ids.push_back(id);
  t = score_tournament(j.at("sample_id").get<std::string>(), ids, j.at("matches").get<std::vector<Match>>());
}

TournamentResult score_tournament(const std::string& sample_id, std::vector<std::string> candidate_ids,
                                  const std::vector<Match>& matches) {
  TournamentResult t;
  t.sample_id = sample_id;
  for (const auto& id : candidate_ids) t.scores.emplace(id, 0);
  if (t.scores.size() != candidate_ids.size()) {
    throw Error(ErrorKind::InvalidArgument, "duplicate candidate id in tournament " + sample_id);
  }
  for (const auto& m : matches) {
    auto ia = t.scores.find(m.a);
    auto ib = t.scores.find(m.b);
    if (ia == t.scores.end() || ib == t.scores.end() || m.a == m.b) {
      throw Error(ErrorKind::InvalidArgument, "match between unknown candidates in tournament " + sample_id);
    }
    switch (m.result) {
      case Label::First: ia->second += 3; ++t.decisive; break;
      case Label::Second: ib->second += 3; ++t.decisive; break;
      case Label::Tie: ia->second += 1; ib->second += 1; ++t.ties; break;
    }
  }
  t.matches = matches;
  t.ranking.assign(candidate_ids.begin(), candidate_ids.end());
  std::sort(t.ranking.begin(), t.ranking.end(), [&](const std::string& x, const std::string& y) {
    const int px = t.scores.at(x);
    const int py = t.scores.at(y);
    return px != py ? px > py : x < y;
  });
  return t;
}

TournamentResult run_tournament(const synthesis::ResponseSet& rs, judge::PairJudge& judge, std::size_t workers) {
  if (rs.candidates.size() < 2) {
    throw Error(ErrorKind::InsufficientCandidates, "tournament for " + rs.sample_id + " needs 2 candidates");
  }
  std::map<std::string, std::string> text_by_id;
  for (const auto& c : rs.candidates) text_by_id.emplace(candidate_id(c), c.text);
  if (text_by_id.size() != rs.candidates.size()) {
    throw Error(ErrorKind::InvalidArgument, "duplicate candidates in " + rs.sample_id);
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  for (auto i = text_by_id.begin(); i != text_by_id.end(); ++i) {
    for (auto j = std::next(i); j != text_by_id.end(); ++j) pairs.emplace_back(i->first, j->first);
  }
  auto matches = parallel_map(
      pairs,
      [&](const std::pair<std::string, std::string>& p) {
        const auto sj = judge::judge_with_swap(judge, rs.instruction, text_by_id.at(p.first), text_by_id.at(p.second));
        Match m{p.first, p.second, Label::Tie, !sj.consistent};
        if (sj.consistent) m.result = *sj.forward.verdict;
        return m;
      },
      workers);
  std::vector<std::string> ids;
  for (const auto& [id, _] : text_by_id) ids.push_back(id);
  return score_tournament(rs.sample_id, ids, matches);
}

HardEasy select_hard_easy(const TournamentResult& t) {
  if (t.ranking.size() < 2) throw Error(ErrorKind::InsufficientCandidates, "ranking of " + t.sample_id);
  return {t.ranking.front(), t.ranking.back()};
}

// ---------------------------------------------------------------------------

double VariantSpec::effective_hard_ratio() const {
  switch (variant) {
    case DpoVariant::E100: return 0.0;
    case DpoVariant::E70H30: return 0.30;
    case DpoVariant::Custom: return hard_ratio;
    default: return 0.0;
  }
}

std::string VariantSpec::name() const {
  switch (variant) {
    case DpoVariant::Plain: return "PLAIN";
    case DpoVariant::Negative: return "NEGATIVE";
    case DpoVariant::E100: return "E100";
    case DpoVariant::E70H30: return "E70H30";
    case DpoVariant::Custom: {
      std::ostringstream os;
      os << "CUSTOM(" << std::fixed << std::setprecision(2) << hard_ratio << ")";
      return os.str();
    }
  }
  return "E100";
}

VariantSpec parse_variant(std::string_view s) {
  if (s == "PLAIN") return {DpoVariant::Plain, 0.0};
  if (s == "NEGATIVE") return {DpoVariant::Negative, 0.0};
  if (s == "E100") return {DpoVariant::E100, 0.0};
  if (s == "E70H30") return {DpoVariant::E70H30, 0.30};
  static const std::regex kCustom(R"(CUSTOM[(:]\s*([0-9]*\.?[0-9]+)\s*\)?)");
  std::cmatch m;
  if (std::regex_match(s.begin(), s.end(), m, kCustom)) {
    const double h = std::stod(m[1].str());
    if (h < 0.0 || h > 1.0) throw Error(ErrorKind::InvalidArgument, "hard ratio must lie in [0, 1]");
    return {DpoVariant::Custom, h};
  }
  throw Error(ErrorKind::InvalidArgument, "unknown DPO variant '" + std::string(s) + "'");
}

std::string_view reject_difficulty_name(RejectDifficulty d) noexcept {
  switch (d) {
    case RejectDifficulty::Easy: return "EASY";
    case RejectDifficulty::Hard: return "HARD";
    case RejectDifficulty::Negative: return "NEGATIVE";
    case RejectDifficulty::Random: return "RANDOM";
  }
  return "EASY";
}

namespace {

RejectDifficulty parse_reject_difficulty(std::string_view s) {
  for (auto d : {RejectDifficulty::Easy, RejectDifficulty::Hard, RejectDifficulty::Negative, RejectDifficulty::Random}) {
    if (reject_difficulty_name(d) == s) return d;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown reject difficulty '" + std::string(s) + "'");
}

bool same_text(const std::string& a, const std::string& b) { return text::trim(a) == text::trim(b); }

}  // namespace

void to_json(Json& j, const DpoPair& p) {
  j = Json{{"instruction", p.instruction},
           {"chosen", p.chosen},
           {"rejected", p.rejected},
           {"variant", p.variant},
           {"reject_difficulty", reject_difficulty_name(p.reject_difficulty)}};
}

void from_json(const Json& j, DpoPair& p) {
  p.instruction = j.at("instruction").get<std::string>();
  p.chosen = j.at("chosen").get<std::string>();
  p.rejected = j.at("rejected").get<std::string>();
  p.variant = j.at("variant").get<std::string>();
  p.reject_difficulty = parse_reject_difficulty(j.at("reject_difficulty").get<std::string>());
}

DpoResult build_dpo_dataset(const std::vector<synthesis::ResponseSet>& samples,
                            const std::map<std::string, TournamentResult>& tournaments, const VariantSpec& variant,
                            std::uint64_t rng_seed) {
  DpoResult out;
  std::vector<const synthesis::ResponseSet*> eligible;
  for (const auto& rs : samples) {
    if (!rs.chosen_original()) {
      out.warnings.push_back("sample " + rs.sample_id + " has no original response; skipped");
      continue;
    }
    eligible.push_back(&rs);
  }
  std::sort(eligible.begin(), eligible.end(),
            [](const auto* a, const auto* b) { return a->sample_id < b->sample_id; });
  for (std::size_t i = 1; i < eligible.size(); ++i) {
    if (eligible[i]->sample_id == eligible[i - 1]->sample_id) {
      throw Error(ErrorKind::InvalidArgument, "duplicate sample " + eligible[i]->sample_id);
    }
  }

  const bool ranked = variant.variant == DpoVariant::E100 || variant.variant == DpoVariant::E70H30 ||
                      variant.variant == DpoVariant::Custom;
  std::set<std::size_t> hard_set;
  if (ranked) {
    for (const auto* rs : eligible) {
      if (!tournaments.count(rs->sample_id)) throw Error(ErrorKind::MissingTournament, rs->sample_id);
    }
    const auto n_hard =
        static_cast<std::size_t>(std::llround(variant.effective_hard_ratio() * static_cast<double>(eligible.size())));
    Rng rng(derive_seed(rng_seed, "dpo/hard"));
    const auto perm = rng.permutation(eligible.size());
    hard_set.insert(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_hard));
  }
  if (variant.variant == DpoVariant::Negative && eligible.size() < 2) {
    throw Error(ErrorKind::PoolTooSmall, "NEGATIVE needs at least 2 samples");
  }

  for (std::size_t i = 0; i < eligible.size(); ++i) {
    const auto& rs = *eligible[i];
    DpoPair p;
    p.instruction = rs.instruction;
    p.chosen = rs.chosen_original()->text;
    p.variant = variant.name();
    p.sample_id = rs.sample_id;
    p.rejected_sample_id = rs.sample_id;

    if (ranked) {
      const auto& t = tournaments.at(rs.sample_id);
      std::map<std::string, std::string> text_by_id;
      for (const auto& c : rs.candidates) text_by_id.emplace(candidate_id(c), c.text);
      std::vector<std::string> ranking;
      for (const auto& id : t.ranking) {
        auto it = text_by_id.find(id);
        if (it == text_by_id.end()) {
          throw Error(ErrorKind::MissingTournament, "tournament for " + rs.sample_id + " ranks unknown candidate");
        }
        if (!same_text(it->second, p.chosen)) ranking.push_back(it->second);
      }
      if (ranking.empty()) {
        out.warnings.push_back("sample " + rs.sample_id + " has no ranked candidate besides the chosen one; skipped");
        continue;
      }
      const bool hard = hard_set.count(i) > 0;
      p.reject_difficulty = hard ? RejectDifficulty::Hard : RejectDifficulty::Easy;
      p.rejected = hard ? ranking.front() : ranking.back();
    } else if (variant.variant == DpoVariant::Plain) {
      std::vector<std::string> pool;
      for (const auto& c : rs.candidates) {
        if (c.origin.kind == OriginKind::Synth && !same_text(c.text, p.chosen)) pool.push_back(c.text);
      }
      if (pool.empty()) {
        out.warnings.push_back("sample " + rs.sample_id + " has no synthetic candidate; skipped");
        continue;
      }
      Rng rng(derive_seed(rng_seed, "dpo/plain/" + rs.sample_id));
      p.rejected = pool[rng.below(pool.size())];
      p.reject_difficulty = RejectDifficulty::Random;
    } else {
      std::vector<std::size_t> pool;
      for (std::size_t j = 0; j < eligible.size(); ++j) {
        if (same_text(eligible[j]->instruction, rs.instruction)) continue;
        if (same_text(eligible[j]->chosen_original()->text, p.chosen)) continue;
        pool.push_back(j);
      }
      if (pool.empty()) {
        out.warnings.push_back("sample " + rs.sample_id + " has no response to a different instruction; skipped");
        continue;
      }
      Rng rng(derive_seed(rng_seed, "dpo/negative/" + rs.sample_id));
      const auto& other = *eligible[pool[rng.below(pool.size())]];
      p.rejected = other.chosen_original()->text;
      p.rejected_sample_id = other.sample_id;
      p.reject_difficulty = RejectDifficulty::Negative;
    }
    out.pairs.push_back(std::move(p));
  }
  return out;
}

void to_json(Json& j, const SftRecord& r) { j = Json{{"instruction", r.instruction}, {"response", r.response}}; }

SftResult export_sft(const std::vector<synthesis::ResponseSet>& samples) {
  SftResult out;
  for (const auto& rs : samples) {
    const auto* orig = rs.chosen_original();
    if (!orig) {
      out.warnings.push_back("sample " + rs.sample_id + " has no original response; skipped");
      continue;
    }
    out.records.push_back({rs.sample_id, rs.instruction, orig->text});
  }
  std::stable_sort(out.records.begin(), out.records.end(),
                   [](const SftRecord& a, const SftRecord& b) { return a.sample_id < b.sample_id; });
  return out;
}

// ---------------------------------------------------------------------------

TieRule parse_tie_rule(std::string_view s) {
  if (s == "half" || s == "ties-as-half") return TieRule::Half;
  if (s == "excluded" || s == "ties-excluded") return TieRule::Excluded;
  throw Error(ErrorKind::InvalidArgument, "unknown tie rule '" + std::string(s) + "'");
}

void to_json(Json& j, const WinRateReport& r) {
  j = Json{{"wins", r.wins},
           {"ties", r.ties},
           {"losses", r.losses},
           {"inconsistent", r.inconsistent},
           {"win_rate", r.win_rate},
           {"judge_id", r.judge_id},
           {"tie_rule", r.tie_rule == TieRule::Half ? "half" : "excluded"}};
}

double win_rate_value(std::size_t wins, std::size_t ties, std::size_t losses, TieRule rule) {
  const double w = static_cast<double>(wins);
  if (rule == TieRule::Half) {
    const auto total = wins + ties + losses;
    return total == 0 ? 0.0 : (w + 0.5 * static_cast<double>(ties)) / static_cast<double>(total);
  }
  const auto decisive = wins + losses;
  return decisive == 0 ? 0.0 : w / static_cast<double>(decisive);
}

WinRateReport win_rate(const std::map<std::string, std::string>& candidate,
                       const std::map<std::string, std::string>& reference, judge::PairJudge& judge, TieRule rule,
                       std::size_t workers) {
  if (candidate.size() != reference.size() ||
      !std::equal(candidate.begin(), candidate.end(), reference.begin(),
                  [](const auto& a, const auto& b) { return a.first == b.first; })) {
    throw Error(ErrorKind::KeyMismatch, "candidate and reference answer different instruction sets");
  }
  std::vector<std::string> keys;
  for (const auto& [k, _] : candidate) keys.push_back(k);
  const auto results = parallel_map(
      keys,
      [&](const std::string& instruction) {
        return judge::judge_with_swap(judge, instruction, candidate.at(instruction), reference.at(instruction));
      },
      workers);
  WinRateReport r;
  r.judge_id = judge.id();
  r.tie_rule = rule;
  for (const auto& sj : results) {
    if (!sj.consistent) {
      ++r.ties;
      ++r.inconsistent;
      continue;
    }
    switch (*sj.forward.verdict) {
      case Label::First: ++r.wins; break;
      case Label::Second: ++r.losses; break;
      case Label::Tie: ++r.ties; break;
    }
  }
  r.win_rate = win_rate_value(r.wins, r.ties, r.losses, rule);
  return r;
}

}  // namespace pairjudge::rankdpo
