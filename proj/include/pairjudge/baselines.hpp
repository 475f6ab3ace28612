#pragma once

// Scalar creativity metrics (perplexity, DSI, Creativity Index over an n-gram
// corpus index) and their conversion into pairwise verdicts.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "pairjudge/core.hpp"
#include "pairjudge/gateway.hpp"
#include "pairjudge/judge.hpp"
#include "pairjudge/text.hpp"

namespace pairjudge::baselines {

/// exp(-mean token logprob) of the text scored on its own.
double ppl(const std::string& text, gateway::Gateway& gw, const std::string& model_id);

enum class Granularity { Token, Segment };

std::string_view granularity_name(Granularity g) noexcept;
Granularity parse_granularity(std::string_view s);

/// Units DSI embeds: clauses for Segment, words or code points for Token.
std::vector<std::string> dsi_units(const std::string& text, Granularity g);

/// Mean cosine distance over all unordered unit pairs. TooFewUnits below 2 units.
double dsi(const std::string& text, gateway::Gateway& gw, const std::string& embed_model,
           Granularity g = Granularity::Segment);

// ---------------------------------------------------------------------------
// N-gram index

/// 64-bit FNV-1a, continued from `h`.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

class NGramIndex {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  NGramIndex() = default;
  NGramIndex(std::size_t n_min, std::size_t n_max, text::Unit unit);

  std::size_t n_min() const noexcept { return n_min_; }
  std::size_t n_max() const noexcept { return n_max_; }
  text::Unit unit() const noexcept { return unit_; }
  std::size_t documents() const noexcept { return documents_; }
  std::size_t ngrams() const noexcept { return ngrams_; }  // occurrences seen while building
  std::size_t size() const noexcept { return table_.size(); }

  /// Adds every n-gram of the document for n in [n_min, n_max].
  void add_document(std::string_view doc);
  /// Sorts and deduplicates the table. Queries are only valid after this.
  void seal();

  bool contains(const std::vector<std::string>& units, std::size_t begin, std::size_t len) const;
  bool contains_hash(std::uint64_t h) const;

  /// Hash of units[begin, begin+len): each unit's bytes followed by 0x1F.
  static std::uint64_t hash_units(const std::vector<std::string>& units, std::size_t begin, std::size_t len);

  void save(const std::filesystem::path& path) const;
  static NGramIndex load(const std::filesystem::path& path);

  bool operator==(const NGramIndex&) const = default;

 private:
  std::size_t n_min_ = 2;
  std::size_t n_max_ = 2;
  text::Unit unit_ = text::Unit::Word;
  std::size_t documents_ = 0;
  std::size_t ngrams_ = 0;
  std::vector<std::uint64_t> table_;
  bool sealed_ = true;
};

/// Throws EmptyCorpus for an empty corpus and InvalidArgument unless
/// 2 <= n_min <= n_max.
NGramIndex build_index(const std::vector<std::string>& corpus, std::size_t n_min, std::size_t n_max,
                       text::Unit unit);

/// 1 - fraction of unit positions covered by an indexed n-gram of length
/// >= L, matching greedily (longest match) from each position left to right.
/// Throws TextTooShort below L units, InvalidArgument for L outside the index range.
double creativity_index(const std::string& text, const NGramIndex& idx, std::size_t L);

// ---------------------------------------------------------------------------
// Scalar verdicts

enum class Metric { Ppl, Dsi, CIndex };

std::string_view metric_name(Metric m) noexcept;
Metric parse_metric(std::string_view s);

struct ScalarVerdictRule {
  Metric metric = Metric::CIndex;
  double tie_band = 0.02;  // relative

  void validate() const;
};

/// TIE when |m1-m2| <= tie_band * max(|m1|, |m2|, 1e-12), else FIRST iff m1 > m2.
Label scalar_verdict(double m1, double m2, const ScalarVerdictRule& rule);

/// A scalar metric posing as a pairwise judge. Scores are memoized per text.
/// A response the metric cannot score (too short, too few units) yields a
/// FAILED outcome, so the pair is excluded like an unparseable verdict.
class ScalarJudge : public judge::PairJudge {
 public:
  using Scorer = std::function<double(const std::string&)>;

  ScalarJudge(ScalarVerdictRule rule, Scorer scorer);

  judge::JudgeOutcome judge(const std::string& instruction, const std::string& r1, const std::string& r2) override;
  std::string id() const override { return std::string(metric_name(rule_.metric)); }

  double score(const std::string& text);

 private:
  ScalarVerdictRule rule_;
  Scorer scorer_;
  std::mutex mu_;
  std::map<std::string, double> memo_;
};

}  // namespace pairjudge::baselines
