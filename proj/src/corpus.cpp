#include "pairjudge/corpus.hpp"

#include <regex>
#include <unordered_map>
#include <unordered_set>

#include "pairjudge/error.hpp"
#include "pairjudge/parallel.hpp"
#include "pairjudge/rng.hpp"
#include "pairjudge/text.hpp"

namespace pairjudge::corpus {

void to_json(Json& j, const RawRecord& r) {
  j = Json{{"source_name", r.source_name},
           {"payload", r.payload},
           {"kind_hint", source_kind_name(r.kind_hint)},
           {"line", r.line}};
}

void from_json(const Json& j, RawRecord& r) {
  r.source_name = j.at("source_name").get<std::string>();
  r.payload = j.at("payload").get<std::map<std::string, std::string>>();
  r.kind_hint = parse_source_kind(j.at("kind_hint").get<std::string>());
  r.line = j.value("line", std::size_t{0});
}

IngestResult ingest(const std::filesystem::path& path, const std::string& source_name, SourceKind kind) {
  auto parsed = jsonl::read(path);
  IngestResult out;
  out.bad_lines = std::move(parsed.bad_lines);
  for (std::size_t i = 0; i < parsed.values.size(); ++i) {
    const auto& v = parsed.values[i];
    const auto line = parsed.line_numbers[i];
    if (!v.is_object() || v.empty()) {
      out.bad_lines.push_back({line, "line is not a non-empty JSON object"});
      continue;
    }
    RawRecord rec{source_name, {}, kind, line};
    for (const auto& [key, value] : v.items()) {
      if (value.is_null()) continue;
      rec.payload[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
    if (rec.payload.empty()) {
      out.bad_lines.push_back({line, "record has no non-null fields"});
      continue;
    }
    out.records.push_back(std::move(rec));
  }
  std::sort(out.bad_lines.begin(), out.bad_lines.end(),
            [](const auto& a, const auto& b) { return a.line_number < b.line_number; });
  return out;
}

// ---------------------------------------------------------------------------
// Filters

std::string_view filter_reason_name(FilterReason r) noexcept {
  switch (r) {
    case FilterReason::Ok: return "OK";
    case FilterReason::TooShort: return "TOO_SHORT";
    case FilterReason::TooLong: return "TOO_LONG";
    case FilterReason::RepeatedPhrase: return "REPEATED_PHRASE";
    case FilterReason::ResponseSubstring: return "RESPONSE_SUBSTRING";
    case FilterReason::LowCreativityScore: return "LOW_CREATIVITY_SCORE";
  }
  return "OK";
}

bool has_repeated_phrase(std::string_view s, std::size_t min_n, std::size_t min_count) {
  if (min_n == 0 || min_count == 0) return false;
  // Every occurrence of a longer n-gram starts an occurrence of its min_n-gram
  // prefix, so counting min_n-grams covers all n >= min_n.
  const auto units = text::split_units(s, text::detect_unit(s));
  if (units.size() < min_n) return false;
  std::unordered_map<std::string, std::size_t> counts;
  for (std::size_t i = 0; i + min_n <= units.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < min_n; ++k) {
      key += units[i + k];
      key.push_back('\x1f');
    }
    if (++counts[key] >= min_count) return true;
  }
  return false;
}

FilterVerdict filter_pair(std::string_view instruction, std::string_view response,
                          const FilterLimits& limits) {
  const auto ilen = text::codepoint_length(instruction);
  const auto rlen = text::codepoint_length(response);
  if (ilen < limits.instruction_min || rlen < limits.response_min) {
    return FilterVerdict::reject(FilterReason::TooShort);
  }
  if (ilen > limits.instruction_max || rlen > limits.response_max) {
    return FilterVerdict::reject(FilterReason::TooLong);
  }
  if (has_repeated_phrase(instruction, limits.repeat_ngram, limits.repeat_count)) {
    return FilterVerdict::reject(FilterReason::RepeatedPhrase);
  }
  const auto needle = text::trim(response);
  if (!needle.empty() && instruction.find(needle) != std::string_view::npos) {
    return FilterVerdict::reject(FilterReason::ResponseSubstring);
  }
  return FilterVerdict::ok();
}

// ---------------------------------------------------------------------------
// Gate

namespace {

std::optional<int> integral_score(const Json& v) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == static_cast<double>(static_cast<int>(d))) return static_cast<int>(d);
    return std::nullopt;
  }
  if (v.is_string()) {
    static const std::regex kInt(R"(^\s*(-?\d+)\s*$)");
    std::smatch m;
    const auto s = v.get<std::string>();
    if (std::regex_match(s, m, kInt)) return std::stoi(m[1].str());
  }
  return std::nullopt;
}

std::string strip_code_fence(const std::string& raw) {
  auto t = text::trim(raw);
  if (t.rfind("```", 0) == 0) {
    const auto nl = t.find('\n');
    const auto end = t.rfind("```");
    if (nl != std::string::npos && end != std::string::npos && end > nl) {
      return text::trim(t.substr(nl + 1, end - nl - 1));
    }
  }
  return t;
}

}  // namespace

CreativityGate parse_gate_reply(const std::string& raw, int threshold) {
  std::optional<int> score;
  std::string analysis;
  try {
    const auto j = Json::parse(strip_code_fence(raw));
    if (j.is_object() && j.contains("score")) {
      score = integral_score(j.at("score"));
      if (j.contains("analysis") && j.at("analysis").is_string()) analysis = j.at("analysis").get<std::string>();
      if (!score) throw Error(ErrorKind::UnparseableScore, "score is not an integer");
    }
  } catch (const Json::parse_error&) {
  }
  if (!score) {
    static const std::regex kScore(R"re("score"\s*:\s*"?(-?\d+)"?)re");
    std::smatch m;
    if (std::regex_search(raw, m, kScore)) score = std::stoi(m[1].str());
  }
  if (!score) throw Error(ErrorKind::UnparseableScore, "no score in reply");
  if (*score < 1 || *score > 6) {
    throw Error(ErrorKind::UnparseableScore, "score " + std::to_string(*score) + " outside 1..6");
  }
  return CreativityGate{*score, std::move(analysis), threshold};
}

std::string gate_text(std::string_view instruction, std::string_view response) {
  return "Instruction: " + std::string(instruction) + "\nResponse: " + std::string(response);
}

CreativityGate gate_creativity(std::string_view instruction, std::string_view response,
                               gateway::Gateway& gw, const std::string& gate_template,
                               const std::string& category, const ModelCall& call, int threshold) {
  const auto prompt = render_template(gate_template, {{"category", category}, {"text", gate_text(instruction, response)}});
  const auto raw = gw.chat(gateway::user_prompt(call.model_id, prompt, call.temperature, call.max_tokens, call.seed));
  return parse_gate_reply(raw, threshold);
}

std::string generate_instruction(std::string_view response, gateway::Gateway& gw,
                                 const std::string& instruction_template, const ModelCall& call) {
  if (text::trim(response).empty()) throw Error(ErrorKind::EmptyInput, "response is empty");
  const auto prompt = render_template(instruction_template, {{"response", std::string(response)}});
  const auto raw = gw.chat(gateway::user_prompt(call.model_id, prompt, call.temperature, call.max_tokens, call.seed));
  auto cleaned = text::strip_wrappers(raw);
  if (cleaned.empty()) throw Error(ErrorKind::EmptyGeneration, "generator returned no instruction");
  return cleaned;
}

std::int64_t call_seed(std::uint64_t root, std::string_view label) {
  return static_cast<std::int64_t>(derive_seed(root, label) >> 33);
}

// ---------------------------------------------------------------------------
// Standardization

void to_json(Json& j, const ReportRow& r) {
  j = Json{{"record_id", r.record_id},
           {"verdict", r.status == RecordStatus::Emitted    ? "ACCEPT"
                       : r.status == RecordStatus::Filtered ? "REJECT"
                                                            : "ERROR"},
           {"reason", r.status == RecordStatus::Errored ? r.error : std::string(filter_reason_name(r.reason))}};
  if (!r.detail.empty()) j["detail"] = r.detail;
  if (!r.sample_id.empty()) j["sample_id"] = r.sample_id;
  if (r.score) j["score"] = *r.score;
}

namespace {

std::string field(const RawRecord& rec, const std::string& name) {
  if (name.empty()) return {};
  auto it = rec.payload.find(name);
  return it == rec.payload.end() ? std::string{} : it->second;
}

struct Outcome {
  std::optional<Sample> sample;
  ReportRow row;
};

Outcome standardize_one(const RawRecord& rec, const SourceConfig& src, gateway::Gateway& gw,
                        const TemplateSet& templates, const StandardizeOptions& opt) {
  Outcome out;
  out.row.record_id = rec.record_id();
  try {
    auto response = text::trim(field(rec, src.response_field));
    if (response.empty()) {
      throw Error(ErrorKind::EmptyInput, "missing response field '" + src.response_field + "'");
    }
    const auto language = !src.language.empty()
                              ? src.language
                              : (text::detect_unit(response) == text::Unit::CodePoint ? "zh" : "en");
    auto instruction = text::trim(field(rec, src.instruction_field));
    auto origin = InstructionOrigin::Native;
    if (src.kind == SourceKind::CreativityDense || src.generate_instruction || instruction.empty()) {
      if (opt.instruction_model.empty()) {
        throw Error(ErrorKind::InvalidConfig, "instruction generation needs an instruction model");
      }
      ModelCall call{opt.instruction_model, opt.generation_temperature, opt.generation_max_tokens,
                     call_seed(opt.seed, "instruction/" + rec.record_id())};
      instruction = generate_instruction(response, gw, templates.get("instruction", template_language(language)), call);
      origin = InstructionOrigin::Generated;
    }

    const auto verdict = filter_pair(instruction, response, opt.limits);
    if (!verdict.accepted) {
      out.row.status = RecordStatus::Filtered;
      out.row.reason = verdict.reason;
      return out;
    }

    auto domain = field(rec, src.domain_field);
    if (domain.empty()) domain = src.domain.empty() ? src.name : src.domain;

    if (opt.gated_kinds.count(src.kind)) {
      if (opt.gate_model.empty()) throw Error(ErrorKind::InvalidConfig, "creativity gate needs a gate model");
      ModelCall call{opt.gate_model, 0.0, 512, call_seed(opt.seed, "gate/" + rec.record_id())};
      const auto gate = gate_creativity(instruction, response, gw, templates.get("gate", template_language(language)),
                                        domain, call, opt.gate_threshold);
      out.row.score = gate.score;
      if (!gate.passed()) {
        out.row.status = RecordStatus::Filtered;
        out.row.reason = FilterReason::LowCreativityScore;
        return out;
      }
    }

    Sample s;
    s.source_kind = src.kind;
    s.source_name = src.name;
    s.domain = std::move(domain);
    s.instruction = std::move(instruction);
    s.response = std::move(response);
    s.instruction_origin = origin;
    s.language = language;
    s.id = sample_id(s.source_name, s.instruction, s.response);
    out.row.sample_id = s.id;
    out.sample = std::move(s);
  } catch (const Error& e) {
    out.row.status = RecordStatus::Errored;
    out.row.error = std::string(error_kind_name(e.kind()));
    out.row.detail = e.what();
  }
  return out;
}

}  // namespace

StandardizeResult standardize(const std::vector<RawRecord>& records,
                              const std::map<std::string, SourceConfig>& sources,
                              gateway::Gateway& gw, const TemplateSet& templates,
                              const StandardizeOptions& options) {
  for (const auto& rec : records) {
    if (!sources.count(rec.source_name)) {
      throw Error(ErrorKind::InvalidConfig, "record from unconfigured source '" + rec.source_name + "'");
    }
  }
  auto outcomes = parallel_map(
      records,
      [&](const RawRecord& rec) { return standardize_one(rec, sources.at(rec.source_name), gw, templates, options); },
      options.concurrency);

  StandardizeResult result;
  std::unordered_set<std::string> seen;
  for (auto& o : outcomes) {
    if (o.sample) {
      if (!seen.insert(o.sample->id).second) {
        o.row.status = RecordStatus::Errored;
        o.row.error = "DuplicateSample";
        o.row.detail = "identical (source, instruction, response) already emitted";
      } else {
        result.samples.push_back(std::move(*o.sample));
      }
    }
    result.report.push_back(std::move(o.row));
  }
  return result;
}

}  // namespace pairjudge::corpus
