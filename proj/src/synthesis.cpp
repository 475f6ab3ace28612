#include "pairjudge/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "pairjudge/corpus.hpp"
#include "pairjudge/error.hpp"
#include "pairjudge/rng.hpp"
#include "pairjudge/similarity.hpp"
#include "pairjudge/text.hpp"

namespace pairjudge::synthesis {

// ---------------------------------------------------------------------------
// ResponseSet

void ResponseSet::validate() const {
  if (candidates.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "response set " + sample_id + " has fewer than 2 candidates");
  }
  std::unordered_set<std::string> texts;
  for (const auto& c : candidates) {
    if (c.sample_id != sample_id) {
      throw Error(ErrorKind::InvalidArgument, "candidate of " + c.sample_id + " inside set " + sample_id);
    }
    const auto t = text::trim(c.text);
    if (t.empty()) throw Error(ErrorKind::InvalidArgument, "empty candidate in set " + sample_id);
    if (!texts.insert(t).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate candidate text in set " + sample_id);
    }
  }
}

const ResponseCandidate* ResponseSet::chosen_original() const {
  const ResponseCandidate* enhanced = nullptr;
  for (const auto& c : candidates) {
    if (c.origin.kind == OriginKind::HumanOriginal) return &c;
    if (c.origin.kind == OriginKind::EnhancedStrongCreative && !enhanced) enhanced = &c;
  }
  return enhanced;
}

void to_json(Json& j, const ResponseSet& rs) {
  j = Json{{"sample_id", rs.sample_id},
           {"instruction", rs.instruction},
           {"source_name", rs.source_name},
           {"source_kind", source_kind_name(rs.source_kind)},
           {"language", rs.language},
           {"candidates", rs.candidates}};
}

void from_json(const Json& j, ResponseSet& rs) {
  rs.sample_id = j.at("sample_id").get<std::string>();
  rs.instruction = j.at("instruction").get<std::string>();
  rs.source_name = j.value("source_name", "");
  rs.source_kind = parse_source_kind(j.value("source_kind", "A_EXISTING_CREATIVE"));
  rs.language = j.value("language", "");
  rs.candidates = j.at("candidates").get<std::vector<ResponseCandidate>>();
}

// ---------------------------------------------------------------------------
// Origin order

bool same_node(const CandidateOrigin& a, const CandidateOrigin& b) {
  if (a.kind != b.kind) return false;
  if (a.kind != OriginKind::Synth) return true;
  return a.generator->model_id == b.generator->model_id &&
         a.generator->prompt_kind == b.generator->prompt_kind;
}

namespace {

bool above(const CandidateOrigin& a, const CandidateOrigin& b) {
  const bool a_top = a.kind == OriginKind::HumanOriginal || a.kind == OriginKind::EnhancedStrongCreative;
  if (a_top && b.kind == OriginKind::Synth) return true;
  if (a.kind == OriginKind::EnhancedStrongCreative && b.kind == OriginKind::OrdinaryOriginal) return true;
  if (a.kind != OriginKind::Synth || b.kind != OriginKind::Synth) return false;

  const auto& ga = *a.generator;
  const auto& gb = *b.generator;
  const bool prompt_ge = ga.prompt_kind == PromptKind::Creative || gb.prompt_kind == PromptKind::Ordinary;
  if (!prompt_ge) return false;
  // A path needs at least one strict step: a tier drop (prompt kind held or
  // lowered on the way) or a CREATIVE -> ORDINARY step inside the same model.
  if (ga.tier > gb.tier) return true;
  return ga.model_id == gb.model_id && ga.prompt_kind == PromptKind::Creative &&
         gb.prompt_kind == PromptKind::Ordinary;
}

}  // namespace

Order compare_origin(const CandidateOrigin& a, const CandidateOrigin& b) {
  if (same_node(a, b)) return Order::Incomparable;
  if (above(a, b)) return Order::Greater;
  if (above(b, a)) return Order::Less;
  return Order::Incomparable;
}

// ---------------------------------------------------------------------------
// Augmentation

std::vector<std::size_t> plan_draws(const std::vector<GeneratorSpec>& specs, std::size_t k) {
  std::vector<std::size_t> plan;
  for (std::size_t i = 0; i < specs.size() && plan.size() < k; ++i) plan.push_back(i);
  std::vector<std::size_t> extra_pool;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].prompt_kind == PromptKind::Ordinary) extra_pool.push_back(i);
  }
  if (extra_pool.empty()) {
    for (std::size_t i = 0; i < specs.size(); ++i) extra_pool.push_back(i);
  }
  for (std::size_t r = 0; plan.size() < k && !extra_pool.empty(); ++r) {
    plan.push_back(extra_pool[r % extra_pool.size()]);
  }
  return plan;
}

AugmentResult augment(const Sample& sample, const std::vector<GeneratorSpec>& specs, gateway::Gateway& gw,
                      const TemplateSet& templates, const AugmentOptions& options) {
  validate_generator_specs(specs);
  {
    std::set<std::pair<std::string, PromptKind>> cells;
    for (const auto& s : specs) cells.emplace(s.model_id, s.prompt_kind);
    if (cells.size() < 2) {
      throw Error(ErrorKind::InvalidConfig, "augmentation needs at least 2 distinct (model, prompt) cells");
    }
  }

  AugmentResult out;
  auto& rs = out.set;
  rs.sample_id = sample.id;
  rs.instruction = sample.instruction;
  rs.source_name = sample.source_name;
  rs.source_kind = sample.source_kind;
  rs.language = sample.language;

  const auto lang = template_language(sample.language);
  std::unordered_set<std::string> seen;
  std::vector<ResponseCandidate> originals;

  const auto original_text = text::trim(sample.response);
  seen.insert(original_text);
  if (sample.source_kind == SourceKind::OrdinaryPair) {
    originals.push_back({sample.id, original_text, CandidateOrigin::ordinary_original()});
    if (options.enhancer_model.empty()) {
      throw Error(ErrorKind::InvalidConfig, "ordinary-pair sources need an enhancer model");
    }
    const auto prompt = render_template(templates.get("enhance", lang), {{"instruction", sample.instruction}});
    for (int attempt = 0; attempt < 2; ++attempt) {
      const auto seed = corpus::call_seed(options.seed, "enhance/" + sample.id + "/" + std::to_string(attempt));
      auto reply = text::trim(gw.chat(gateway::user_prompt(options.enhancer_model, prompt,
                                                           options.enhancer_temperature,
                                                           options.enhancer_max_tokens, seed)));
      if (!reply.empty() && seen.insert(reply).second) {
        originals.push_back({sample.id, std::move(reply), CandidateOrigin::enhanced()});
        break;
      }
      if (attempt == 1) out.warnings.push_back(sample.id + ": enhanced response duplicated an existing text, dropped");
    }
  } else {
    originals.push_back({sample.id, original_text, CandidateOrigin::human()});
  }

  const auto len_hint = std::to_string(text::unit_length(sample.response));
  const auto plan = plan_draws(specs, options.k);
  for (std::size_t d = 0; d < plan.size(); ++d) {
    const auto& spec = specs[plan[d]];
    const auto& tmpl = templates.get(spec.prompt_kind == PromptKind::Creative ? "creative" : "ordinary", lang);
    const auto prompt = render_template(tmpl, {{"instruction", sample.instruction}, {"len", len_hint}});
    bool kept = false;
    for (int attempt = 0; attempt < 2 && !kept; ++attempt) {
      const auto seed = corpus::call_seed(
          options.seed, "augment/" + sample.id + "/" + std::to_string(d) + "/" + std::to_string(attempt));
      auto reply = text::trim(gw.chat(gateway::user_prompt(spec.model_id, prompt, spec.decoding.temperature,
                                                           spec.decoding.max_tokens, seed)));
      if (!reply.empty() && seen.insert(reply).second) {
        rs.candidates.push_back({sample.id, std::move(reply), CandidateOrigin::synth(spec)});
        kept = true;
      }
    }
    if (!kept) {
      out.warnings.push_back(sample.id + ": draw " + std::to_string(d) + " (" + spec.model_id +
                             ") duplicated an existing candidate after regeneration, dropped");
    }
  }
  for (auto& o : originals) rs.candidates.push_back(std::move(o));

  if (rs.candidates.size() < 2) {
    throw Error(ErrorKind::InsufficientCandidates, "sample " + sample.id + " kept fewer than 2 candidates");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pairs

namespace {

PairRecord make_record(const ResponseSet& rs, const ResponseCandidate& first, const ResponseCandidate& second,
                       Label label, PairOrigin origin) {
  PairRecord p;
  p.instruction = rs.instruction;
  p.r1 = first.text;
  p.r2 = second.text;
  p.label = label;
  p.origin = origin;
  p.swapped = false;
  p.metadata["sample_id"] = rs.sample_id;
  p.metadata["source_name"] = rs.source_name;
  p.metadata["r1_origin"] = origin_tag(first.origin);
  p.metadata["r2_origin"] = origin_tag(second.origin);
  p.id = pair_id(p.instruction, p.r1, p.r2, false);
  return p;
}

void push_with_swap(std::vector<PairRecord>& out, PairRecord p) {
  auto s = swap_positions(p);
  out.push_back(std::move(p));
  out.push_back(std::move(s));
}

}  // namespace

std::vector<PairRecord> build_pairs(const ResponseSet& rs, std::uint64_t rng_seed) {
  rs.validate();
  std::vector<PairRecord> out;
  const auto& cs = rs.candidates;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    for (std::size_t j = i + 1; j < cs.size(); ++j) {
      switch (compare_origin(cs[i].origin, cs[j].origin)) {
        case Order::Greater:
          push_with_swap(out, make_record(rs, cs[i], cs[j], Label::First, PairOrigin::Pseudo));
          break;
        case Order::Less:
          push_with_swap(out, make_record(rs, cs[j], cs[i], Label::First, PairOrigin::Pseudo));
          break;
        case Order::Incomparable:
          break;
      }
    }
  }

  // Tie pairs: independent ORDINARY draws of one model, randomly paired off.
  std::map<std::string, std::vector<std::size_t>> ordinary_draws;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const auto& o = cs[i].origin;
    if (o.kind == OriginKind::Synth && o.generator->prompt_kind == PromptKind::Ordinary) {
      ordinary_draws[o.generator->model_id].push_back(i);
    }
  }
  for (auto& [model, draws] : ordinary_draws) {
    if (draws.size() < 2) continue;
    Rng rng(derive_seed(rng_seed, "ties/" + rs.sample_id + "/" + model));
    rng.shuffle(draws);
    for (std::size_t k = 0; k + 1 < draws.size(); k += 2) {
      push_with_swap(out, make_record(rs, cs[draws[k]], cs[draws[k + 1]], Label::Tie, PairOrigin::TiePair));
    }
  }
  return out;
}

std::vector<PairRecord> sample_negatives(const std::vector<Sample>& samples, std::uint64_t rng_seed,
                                         const NegativeOptions& options) {
  if (samples.size() < 2) throw Error(ErrorKind::PoolTooSmall, "negative sampling needs at least 2 samples");
  if (!(options.rate >= 0.0 && options.rate <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "negative rate must lie in [0, 1]");
  }
  Rng rng(rng_seed);
  const auto n = samples.size();
  const auto count = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(options.rate * n)));
  auto order = rng.permutation(n);
  std::vector<std::size_t> chosen(order.begin(), order.begin() + count);
  std::sort(chosen.begin(), chosen.end());

  auto original_tag = [](const Sample& s) {
    return origin_tag(s.source_kind == SourceKind::OrdinaryPair ? CandidateOrigin::ordinary_original()
                                                                : CandidateOrigin::human());
  };

  std::vector<PairRecord> out;
  for (auto idx : chosen) {
    const auto& s = samples[idx];
    const auto own = text::trim(s.response);
    std::vector<std::size_t> pool;
    std::vector<std::size_t> fallback;
    for (std::size_t k = 0; k < n; ++k) {
      const auto& o = samples[k];
      if (k == idx || o.instruction == s.instruction || text::trim(o.response) == own) continue;
      fallback.push_back(k);
      if (o.source_name == s.source_name) pool.push_back(k);
    }
    if (!options.same_source || pool.empty()) pool = std::move(fallback);
    if (pool.empty()) continue;
    const auto& other = samples[pool[rng.below(pool.size())]];

    PairRecord p;
    p.instruction = s.instruction;
    p.r1 = s.response;
    p.r2 = other.response;
    p.label = Label::First;
    p.origin = PairOrigin::Negative;
    p.metadata["sample_id"] = s.id;
    p.metadata["source_name"] = s.source_name;
    p.metadata["negative_sample_id"] = other.id;
    p.metadata["r1_origin"] = original_tag(s);
    p.metadata["r2_origin"] = original_tag(other);
    p.id = pair_id(p.instruction, p.r1, p.r2, false);
    push_with_swap(out, std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training export

std::string_view ablation_tag_name(AblationTag t) noexcept {
  switch (t) {
    case AblationTag::WithNeg: return "WITH_NEG";
    case AblationTag::WithSyn: return "WITH_SYN";
    case AblationTag::WithOrig: return "WITH_ORIG";
  }
  return "WITH_NEG";
}

std::string_view export_variant_name(ExportVariant v) noexcept {
  switch (v) {
    case ExportVariant::Full: return "FULL";
    case ExportVariant::NoNeg: return "NO_NEG";
    case ExportVariant::NoSyn: return "NO_SYN";
    case ExportVariant::OnlySyn: return "ONLY_SYN";
  }
  return "FULL";
}

ExportVariant parse_export_variant(std::string_view s) {
  if (s == "FULL") return ExportVariant::Full;
  if (s == "NO_NEG") return ExportVariant::NoNeg;
  if (s == "NO_SYN") return ExportVariant::NoSyn;
  if (s == "ONLY_SYN") return ExportVariant::OnlySyn;
  throw Error(ErrorKind::InvalidArgument, "unknown export variant '" + std::string(s) + "'");
}

namespace {

bool tag_is_original(const std::string& tag) {
  return tag.rfind("HUMAN_ORIGINAL", 0) == 0 || tag.rfind("ORDINARY_ORIGINAL", 0) == 0;
}

AblationTag parse_ablation_tag(std::string_view s) {
  if (s == "WITH_NEG") return AblationTag::WithNeg;
  if (s == "WITH_SYN") return AblationTag::WithSyn;
  if (s == "WITH_ORIG") return AblationTag::WithOrig;
  throw Error(ErrorKind::InvalidArgument, "unknown ablation tag '" + std::string(s) + "'");
}

}  // namespace

std::set<AblationTag> ablation_tags(const PairRecord& record) {
  std::set<AblationTag> tags;
  if (record.origin == PairOrigin::Negative) tags.insert(AblationTag::WithNeg);
  for (const char* key : {"r1_origin", "r2_origin"}) {
    auto it = record.metadata.find(key);
    if (it == record.metadata.end()) {
      throw Error(ErrorKind::InvalidArgument, "pair " + record.id + " lacks " + key + " metadata");
    }
    tags.insert(tag_is_original(it->second) ? AblationTag::WithOrig : AblationTag::WithSyn);
  }
  return tags;
}

TrainingTriplet make_triplet(const PairRecord& record, const std::string& judge_template) {
  TrainingTriplet t;
  t.record = record;
  t.prompt = render_template(judge_template,
                             {{"instruction", record.instruction}, {"response1", record.r1}, {"response2", record.r2}});
  t.ablation_tags = ablation_tags(record);
  return t;
}

void to_json(Json& j, const TrainingTriplet& t) {
  j = t.record;
  j["prompt"] = t.prompt;
  Json tags = Json::array();
  for (auto tag : t.ablation_tags) tags.push_back(ablation_tag_name(tag));
  j["ablation_tags"] = std::move(tags);
}

void from_json(const Json& j, TrainingTriplet& t) {
  t.record = j.get<PairRecord>();
  t.prompt = j.value("prompt", "");
  t.ablation_tags.clear();
  for (const auto& tag : j.value("ablation_tags", Json::array())) {
    t.ablation_tags.insert(parse_ablation_tag(tag.get<std::string>()));
  }
}

void to_json(Json& j, const ExportCounts& c) {
  j = Json{{"input", c.input}, {"kept", c.kept},           {"pseudo", c.pseudo},
           {"tie", c.tie},     {"negative", c.negative}, {"swapped", c.swapped}};
}

std::vector<TrainingTriplet> export_training(const std::vector<TrainingTriplet>& records, ExportVariant variant,
                                             ExportCounts* counts) {
  std::vector<TrainingTriplet> kept;
  ExportCounts c;
  c.input = records.size();
  for (const auto& t : records) {
    const auto& tags = t.ablation_tags;
    bool keep = true;
    switch (variant) {
      case ExportVariant::Full: break;
      case ExportVariant::NoNeg: keep = !tags.count(AblationTag::WithNeg); break;
      case ExportVariant::NoSyn: keep = !tags.count(AblationTag::WithSyn); break;
      case ExportVariant::OnlySyn: keep = !tags.count(AblationTag::WithOrig); break;
    }
    if (!keep) continue;
    switch (t.record.origin) {
      case PairOrigin::Pseudo:
      case PairOrigin::Human: ++c.pseudo; break;
      case PairOrigin::TiePair: ++c.tie; break;
      case PairOrigin::Negative: ++c.negative; break;
    }
    if (t.record.swapped) ++c.swapped;
    kept.push_back(t);
  }
  c.kept = kept.size();
  if (counts) *counts = c;
  if (kept.empty()) {
    throw Error(ErrorKind::EmptyExport, std::string("variant ") + std::string(export_variant_name(variant)) +
                                            " keeps no records");
  }
  return kept;
}

double classification_loss(const std::vector<double>& probs) {
  double loss = 0.0;
  for (double p : probs) {
    if (p == 0.0) throw Error(ErrorKind::ZeroProbability, "gold label probability is 0");
    if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidArgument, "probability outside (0, 1]");
    loss -= std::log(p);
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Diversity

void to_json(Json& j, const DiversityStats& d) {
  j = Json{{"min", d.min}, {"median", d.median}, {"max", d.max}, {"pairs", d.pairs}};
}

DiversityStats diversity_stats(const ResponseSet& rs, gateway::Gateway& gw, const std::string& embed_model) {
  if (rs.candidates.size() < 2) throw Error(ErrorKind::InvalidArgument, "diversity needs at least 2 candidates");
  std::vector<std::string> texts;
  for (const auto& c : rs.candidates) texts.push_back(c.text);
  const auto vectors = gw.embed(embed_model, texts);
  std::vector<std::vector<double>> raw;
  for (const auto& v : vectors) raw.push_back(v.values);
  const auto d = pairwise_cosine_distances(raw);
  DiversityStats s;
  s.min = *std::min_element(d.begin(), d.end());
  s.max = *std::max_element(d.begin(), d.end());
  s.median = median(d);
  s.pairs = d.size();
  return s;
}

}  // namespace pairjudge::synthesis
