#pragma once

// Response augmentation, the creativity partial order over candidate origins,
// pseudo-labelled pair construction (with ties, negatives and swaps), training
// export variants, the pairwise classification loss and diversity statistics.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "pairjudge/core.hpp"
#include "pairjudge/gateway.hpp"
#include "pairjudge/templates.hpp"

namespace pairjudge::synthesis {

struct ResponseSet {
  std::string sample_id;
  std::string instruction;
  std::string source_name;
  SourceKind source_kind = SourceKind::ExistingCreative;
  std::string language;
  std::vector<ResponseCandidate> candidates;

  /// Throws InvalidArgument unless: >= 2 candidates, all share sample_id, texts
  /// pairwise distinct after trimming.
  void validate() const;

  /// The most creative original response: the human original for creative
  /// sources, the enhanced rewrite for ordinary-pair sources.
  const ResponseCandidate* chosen_original() const;
};

void to_json(Json& j, const ResponseSet& rs);
void from_json(const Json& j, ResponseSet& rs);

// ---------------------------------------------------------------------------
// Origin order

enum class Order { Greater, Less, Incomparable };

/// Partial order over origin nodes:
///   HUMAN_ORIGINAL and ENHANCED_STRONG_CREATIVE sit above every SYNTH node;
///   ENHANCED_STRONG_CREATIVE sits above ORDINARY_ORIGINAL;
///   SYNTH: same model => CREATIVE > ORDINARY, same prompt kind => higher tier
///   > lower tier, closed transitively.
/// Everything else, including a node compared with itself, is Incomparable.
Order compare_origin(const CandidateOrigin& a, const CandidateOrigin& b);

/// Same creativity-order node (SYNTH nodes are (model, prompt kind)).
bool same_node(const CandidateOrigin& a, const CandidateOrigin& b);

// ---------------------------------------------------------------------------
// Augmentation

struct AugmentOptions {
  std::size_t k = 5;            // synthetic candidates per sample
  std::string enhancer_model;   // strong model for ordinary-pair sources
  double enhancer_temperature = 0.7;
  int enhancer_max_tokens = 1024;
  std::uint64_t seed = 0;
};

struct AugmentResult {
  ResponseSet set;
  std::vector<std::string> warnings;
};

/// Draw plan for k synthetic candidates: one per spec in listed order, then
/// extra draws round-robin over ORDINARY specs (second draws of one spec are
/// what tie pairs are made from); CREATIVE specs only when no ORDINARY exists.
std::vector<std::size_t> plan_draws(const std::vector<GeneratorSpec>& specs, std::size_t k);

/// Generates synthetic candidates with the ordinary/creative templates (length
/// hint = unit length of the original response) and appends the originals.
/// A generation that duplicates an existing text is regenerated once with a
/// fresh seed and dropped (with a warning) if it is still a duplicate.
/// Throws InsufficientCandidates when fewer than 2 candidates survive.
AugmentResult augment(const Sample& sample, const std::vector<GeneratorSpec>& specs, gateway::Gateway& gw,
                      const TemplateSet& templates, const AugmentOptions& options);

// ---------------------------------------------------------------------------
// Pairs

/// Pseudo-labelled pairs for every comparable candidate pair (more creative
/// response first), TIE pairs from a seeded random pairing of same-model
/// ORDINARY draws, and the swapped variant of each record right after it.
std::vector<PairRecord> build_pairs(const ResponseSet& rs, std::uint64_t rng_seed);

struct NegativeOptions {
  double rate = 0.10;
  bool same_source = true;  // falls back to the whole pool when a source has no other instruction
};

/// For a seeded `rate` fraction of samples, pairs the in-context response
/// (first, label FIRST) against a response to a different instruction.
/// Swapped variants included. Throws PoolTooSmall for fewer than 2 samples.
std::vector<PairRecord> sample_negatives(const std::vector<Sample>& samples, std::uint64_t rng_seed,
                                         const NegativeOptions& options = {});

// ---------------------------------------------------------------------------
// Training export

enum class AblationTag { WithNeg, WithSyn, WithOrig };
enum class ExportVariant { Full, NoNeg, NoSyn, OnlySyn };

std::string_view ablation_tag_name(AblationTag t) noexcept;
std::string_view export_variant_name(ExportVariant v) noexcept;
ExportVariant parse_export_variant(std::string_view s);

struct TrainingTriplet {
  PairRecord record;
  std::string prompt;
  std::set<AblationTag> ablation_tags;
};

void to_json(Json& j, const TrainingTriplet& t);
void from_json(const Json& j, TrainingTriplet& t);

/// Tags from the record's origin and its r1_origin/r2_origin metadata:
/// WITH_NEG for negatives, WITH_SYN when either side was model-generated,
/// WITH_ORIG when either side is an original response.
std::set<AblationTag> ablation_tags(const PairRecord& record);

/// Renders the judge prompt for the record and attaches its tags.
TrainingTriplet make_triplet(const PairRecord& record, const std::string& judge_template);

struct ExportCounts {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::size_t pseudo = 0;
  std::size_t tie = 0;
  std::size_t negative = 0;
  std::size_t swapped = 0;
};

void to_json(Json& j, const ExportCounts& c);

/// FULL keeps everything; NO_NEG drops negatives; NO_SYN keeps pairs with no
/// generated side; ONLY_SYN drops anything touching an original. Throws
/// EmptyExport when nothing survives.
std::vector<TrainingTriplet> export_training(const std::vector<TrainingTriplet>& records, ExportVariant variant,
                                             ExportCounts* counts = nullptr);

/// -sum(ln p). Each p must lie in (0, 1]; p == 0 throws ZeroProbability.
double classification_loss(const std::vector<double>& gold_label_probs);

// ---------------------------------------------------------------------------
// Diversity

struct DiversityStats {
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
  std::size_t pairs = 0;
};

void to_json(Json& j, const DiversityStats& d);

/// Cosine distances between candidate embeddings over all unordered pairs.
DiversityStats diversity_stats(const ResponseSet& rs, gateway::Gateway& gw, const std::string& embed_model);

}  // namespace pairjudge::synthesis
