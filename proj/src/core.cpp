#include "pairjudge/core.hpp"

#include <unordered_map>

#include "pairjudge/digest.hpp"
#include "pairjudge/error.hpp"

namespace pairjudge {

std::string_view label_name(Label l) noexcept {
  switch (l) {
    case Label::First: return "FIRST";
    case Label::Second: return "SECOND";
    case Label::Tie: return "TIE";
  }
  return "TIE";
}

Label parse_label(std::string_view s) {
  if (s == "FIRST") return Label::First;
  if (s == "SECOND") return Label::Second;
  if (s == "TIE") return Label::Tie;
  throw Error(ErrorKind::InvalidArgument, "unknown label '" + std::string(s) + "'");
}

std::string_view source_kind_name(SourceKind k) noexcept {
  switch (k) {
    case SourceKind::ExistingCreative: return "A_EXISTING_CREATIVE";
    case SourceKind::CreativityDense: return "B_CREATIVITY_DENSE";
    case SourceKind::OrdinaryPair: return "C_ORDINARY_PAIR";
  }
  return "A_EXISTING_CREATIVE";
}

SourceKind parse_source_kind(std::string_view s) {
  if (s == "A_EXISTING_CREATIVE" || s == "A") return SourceKind::ExistingCreative;
  if (s == "B_CREATIVITY_DENSE" || s == "B") return SourceKind::CreativityDense;
  if (s == "C_ORDINARY_PAIR" || s == "C") return SourceKind::OrdinaryPair;
  throw Error(ErrorKind::InvalidArgument, "unknown source kind '" + std::string(s) + "'");
}

std::string sample_id(std::string_view source_name, std::string_view instruction,
                      std::string_view response) {
  return digest_fields({source_name, instruction, response});
}

void validate_generator_specs(const std::vector<GeneratorSpec>& specs) {
  std::unordered_map<std::string, int> tiers;
  for (const auto& s : specs) {
    if (s.tier < 0) {
      throw Error(ErrorKind::InvalidConfig, "generator '" + s.model_id + "' has negative tier");
    }
    auto [it, inserted] = tiers.emplace(s.model_id, s.tier);
    if (!inserted && it->second != s.tier) {
      throw Error(ErrorKind::InvalidConfig,
                  "generator '" + s.model_id + "' listed with two different tiers");
    }
  }
}

namespace {

std::string_view prompt_kind_name(PromptKind k) {
  return k == PromptKind::Creative ? "CREATIVE" : "ORDINARY";
}

PromptKind parse_prompt_kind(std::string_view s) {
  if (s == "CREATIVE") return PromptKind::Creative;
  if (s == "ORDINARY") return PromptKind::Ordinary;
  throw Error(ErrorKind::InvalidArgument, "unknown prompt kind '" + std::string(s) + "'");
}

std::string_view origin_kind_name(OriginKind k) {
  switch (k) {
    case OriginKind::HumanOriginal: return "HUMAN_ORIGINAL";
    case OriginKind::OrdinaryOriginal: return "ORDINARY_ORIGINAL";
    case OriginKind::EnhancedStrongCreative: return "ENHANCED_STRONG_CREATIVE";
    case OriginKind::Synth: return "SYNTH";
  }
  return "SYNTH";
}

OriginKind parse_origin_kind(std::string_view s) {
  if (s == "HUMAN_ORIGINAL") return OriginKind::HumanOriginal;
  if (s == "ORDINARY_ORIGINAL") return OriginKind::OrdinaryOriginal;
  if (s == "ENHANCED_STRONG_CREATIVE") return OriginKind::EnhancedStrongCreative;
  if (s == "SYNTH") return OriginKind::Synth;
  throw Error(ErrorKind::InvalidArgument, "unknown origin '" + std::string(s) + "'");
}

}  // namespace

std::string origin_tag(const CandidateOrigin& origin) {
  std::string tag(origin_kind_name(origin.kind));
  if (origin.kind == OriginKind::Synth && origin.generator) {
    tag += ":" + origin.generator->model_id + ":" +
           std::string(prompt_kind_name(origin.generator->prompt_kind));
  }
  return tag;
}

std::string candidate_id(const ResponseCandidate& c) {
  return digest_fields({c.sample_id, c.text});
}

std::string_view pair_origin_name(PairOrigin o) noexcept {
  switch (o) {
    case PairOrigin::Pseudo: return "PSEUDO";
    case PairOrigin::Human: return "HUMAN";
    case PairOrigin::Negative: return "NEGATIVE";
    case PairOrigin::TiePair: return "TIE_PAIR";
  }
  return "PSEUDO";
}

PairOrigin parse_pair_origin(std::string_view s) {
  if (s == "PSEUDO") return PairOrigin::Pseudo;
  if (s == "HUMAN") return PairOrigin::Human;
  if (s == "NEGATIVE") return PairOrigin::Negative;
  if (s == "TIE_PAIR") return PairOrigin::TiePair;
  throw Error(ErrorKind::InvalidArgument, "unknown pair origin '" + std::string(s) + "'");
}

std::string pair_id(std::string_view instruction, std::string_view r1, std::string_view r2,
                    bool swapped) {
  return digest_fields({instruction, r1, r2, swapped ? "1" : "0"});
}

PairRecord swap_positions(const PairRecord& p) {
  PairRecord s = p;
  std::swap(s.r1, s.r2);
  s.label = complement(p.label);
  s.swapped = !p.swapped;
  auto o1 = p.metadata.find("r1_origin");
  auto o2 = p.metadata.find("r2_origin");
  if (o1 != p.metadata.end()) s.metadata["r2_origin"] = o1->second;
  if (o2 != p.metadata.end()) s.metadata["r1_origin"] = o2->second;
  s.id = pair_id(s.instruction, s.r1, s.r2, s.swapped);
  return s;
}

// ---------------------------------------------------------------------------
// JSON

void to_json(Json& j, const Label& l) { j = std::string(label_name(l)); }
void from_json(const Json& j, Label& l) { l = parse_label(j.get<std::string>()); }

void to_json(Json& j, const GeneratorSpec& g) {
  j = Json{{"model_id", g.model_id},
           {"tier", g.tier},
           {"prompt_kind", prompt_kind_name(g.prompt_kind)},
           {"decoding", {{"temperature", g.decoding.temperature}, {"max_tokens", g.decoding.max_tokens}}}};
}

void from_json(const Json& j, GeneratorSpec& g) {
  g.model_id = j.at("model_id").get<std::string>();
  g.tier = j.at("tier").get<int>();
  g.prompt_kind = parse_prompt_kind(j.at("prompt_kind").get<std::string>());
  if (j.contains("decoding")) {
    const auto& d = j.at("decoding");
    g.decoding.temperature = d.value("temperature", 0.7);
    g.decoding.max_tokens = d.value("max_tokens", 1024);
  }
}

void to_json(Json& j, const CandidateOrigin& o) {
  j = Json{{"kind", origin_kind_name(o.kind)}};
  if (o.generator) j["generator"] = *o.generator;
}

void from_json(const Json& j, CandidateOrigin& o) {
  o.kind = parse_origin_kind(j.at("kind").get<std::string>());
  o.generator.reset();
  if (j.contains("generator")) o.generator = j.at("generator").get<GeneratorSpec>();
  if ((o.kind == OriginKind::Synth) != o.generator.has_value()) {
    throw Error(ErrorKind::InvalidArgument, "SYNTH origin requires exactly one generator");
  }
}

void to_json(Json& j, const Sample& s) {
  j = Json{{"id", s.id},
           {"source_kind", source_kind_name(s.source_kind)},
           {"source_name", s.source_name},
           {"domain", s.domain},
           {"instruction", s.instruction},
           {"response", s.response},
           {"instruction_origin", s.instruction_origin == InstructionOrigin::Native ? "NATIVE" : "GENERATED"},
           {"language", s.language}};
}

void from_json(const Json& j, Sample& s) {
  s.id = j.at("id").get<std::string>();
  s.source_kind = parse_source_kind(j.at("source_kind").get<std::string>());
  s.source_name = j.at("source_name").get<std::string>();
  s.domain = j.value("domain", "");
  s.instruction = j.at("instruction").get<std::string>();
  s.response = j.at("response").get<std::string>();
  const auto io = j.value("instruction_origin", "NATIVE");
  if (io != "NATIVE" && io != "GENERATED") {
    throw Error(ErrorKind::InvalidArgument, "unknown instruction_origin '" + io + "'");
  }
  s.instruction_origin = io == "NATIVE" ? InstructionOrigin::Native : InstructionOrigin::Generated;
  s.language = j.value("language", "");
}

void to_json(Json& j, const ResponseCandidate& c) {
  j = Json{{"sample_id", c.sample_id}, {"text", c.text}, {"origin", c.origin}};
}

void from_json(const Json& j, ResponseCandidate& c) {
  c.sample_id = j.at("sample_id").get<std::string>();
  c.text = j.at("text").get<std::string>();
  c.origin = j.at("origin").get<CandidateOrigin>();
}

void to_json(Json& j, const PairRecord& p) {
  j = Json{{"id", p.id},
           {"instruction", p.instruction},
           {"r1", p.r1},
           {"r2", p.r2},
           {"label", p.label},
           {"origin", pair_origin_name(p.origin)},
           {"swapped", p.swapped},
           {"metadata", p.metadata}};
}

void from_json(const Json& j, PairRecord& p) {
  p.id = j.at("id").get<std::string>();
  p.instruction = j.at("instruction").get<std::string>();
  p.r1 = j.at("r1").get<std::string>();
  p.r2 = j.at("r2").get<std::string>();
  p.label = j.at("label").get<Label>();
  p.origin = parse_pair_origin(j.at("origin").get<std::string>());
  p.swapped = j.value("swapped", false);
  p.metadata = j.value("metadata", std::map<std::string, std::string>{});
}

}  // namespace pairjudge
