#include "pairjudge/judge.hpp"

#include <regex>

#include "pairjudge/error.hpp"
#include "pairjudge/text.hpp"

namespace pairjudge::judge {

std::string_view parse_path_name(ParsePath p) noexcept {
  switch (p) {
    case ParsePath::Tag: return "TAG";
    case ParsePath::Pattern: return "PATTERN";
    case ParsePath::Failed: return "FAILED";
  }
  return "FAILED";
}

ParsePath parse_parse_path(std::string_view s) {
  if (s == "TAG") return ParsePath::Tag;
  if (s == "PATTERN") return ParsePath::Pattern;
  if (s == "FAILED") return ParsePath::Failed;
  throw Error(ErrorKind::InvalidArgument, "unknown parse path '" + std::string(s) + "'");
}

void JudgeConfig::validate() const {
  if (model_id.empty()) throw Error(ErrorKind::InvalidConfig, "judge model is not set");
  if (temperature != 0.0) throw Error(ErrorKind::InvalidConfig, "judge temperature must be 0");
}

Label JudgeOutcome::verdict_or_throw() const {
  if (!verdict) throw Error(ErrorKind::VerdictUnparseable, raw.substr(0, 200));
  return *verdict;
}

namespace {

Label tag_label(const std::string& token) {
  if (token == "1") return Label::First;
  if (token == "2") return Label::Second;
  return Label::Tie;
}

std::optional<Label> free_text_label(const std::string& raw) {
  static const std::regex kFirst(R"(response\s*(1|one|a)\s+is\s+(clearly\s+|slightly\s+|much\s+)?more\s+creative)",
                                 std::regex::icase);
  static const std::regex kSecond(R"(response\s*(2|two|b)\s+is\s+(clearly\s+|slightly\s+|much\s+)?more\s+creative)",
                                  std::regex::icase);
  static const std::regex kTie(
      R"((equally\s+creative|creatively\s+comparable|comparable\s+in\s+creativity|similar(ly)?\s+creative|\bit'?s\s+a\s+tie\b))",
      std::regex::icase);
  static const std::string kFirstZh = "回复1更有创意";
  static const std::string kSecondZh = "回复2更有创意";
  static const std::string kTieZh = "创意相当";

  const bool first = std::regex_search(raw, kFirst) || raw.find(kFirstZh) != std::string::npos;
  const bool second = std::regex_search(raw, kSecond) || raw.find(kSecondZh) != std::string::npos;
  const bool tie = std::regex_search(raw, kTie) || raw.find(kTieZh) != std::string::npos;
  if (first + second + tie != 1) return std::nullopt;
  if (first) return Label::First;
  if (second) return Label::Second;
  return Label::Tie;
}

}  // namespace

JudgeOutcome parse_verdict(const std::string& raw, ParseMode mode) {
  JudgeOutcome out;
  out.raw = raw;
  static const std::regex kTag(R"(VERDICT\s*(?::|：)\s*(1|2|TIE)\b)", std::regex::icase);
  std::smatch last;
  bool found = false;
  for (auto it = std::sregex_iterator(raw.begin(), raw.end(), kTag); it != std::sregex_iterator(); ++it) {
    last = *it;
    found = true;
  }
  if (found) {
    auto token = last[1].str();
    for (auto& ch : token) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    out.verdict = tag_label(token);
    out.parse_path = ParsePath::Tag;
    out.rationale = text::trim(raw.substr(0, static_cast<std::size_t>(last.position(0))));
    return out;
  }
  if (mode == ParseMode::PatternFallback) {
    if (auto l = free_text_label(raw)) {
      out.verdict = *l;
      out.parse_path = ParsePath::Pattern;
      out.rationale = text::trim(raw);
      return out;
    }
  }
  out.parse_path = ParsePath::Failed;
  return out;
}

std::string render_judge_prompt(const std::string& tmpl, const std::string& instruction, const std::string& r1,
                                const std::string& r2) {
  return render_template(tmpl, {{"instruction", instruction}, {"response1", r1}, {"response2", r2}});
}

LlmJudge::LlmJudge(JudgeConfig cfg, std::shared_ptr<gateway::Gateway> gw, const TemplateSet& templates)
    : cfg_(std::move(cfg)), gw_(std::move(gw)) {
  cfg_.validate();
  template_ = templates.get(cfg_.template_id, template_language(cfg_.language));
}

JudgeOutcome LlmJudge::judge(const std::string& instruction, const std::string& r1, const std::string& r2) {
  if (text::trim(instruction).empty() || text::trim(r1).empty() || text::trim(r2).empty()) {
    throw Error(ErrorKind::EmptyInput, "judge inputs must be non-empty");
  }
  const auto prompt = render_judge_prompt(template_, instruction, r1, r2);
  const auto raw = gw_->chat(gateway::user_prompt(cfg_.model_id, prompt, 0.0, cfg_.max_tokens));
  return parse_verdict(raw, cfg_.parse_mode);
}

JudgeOutcome judge_pair(const std::string& instruction, const std::string& r1, const std::string& r2,
                        const JudgeConfig& cfg, gateway::Gateway& gw, const TemplateSet& templates) {
  // non-owning view of gw for the duration of the call
  LlmJudge j(cfg, std::shared_ptr<gateway::Gateway>(&gw, [](gateway::Gateway*) {}), templates);
  return j.judge(instruction, r1, r2);
}

std::optional<Label> SwapJudgment::agreed() const {
  if (!consistent) return std::nullopt;
  return forward.verdict;
}

SwapJudgment judge_with_swap(PairJudge& judge, const std::string& instruction, const std::string& r1,
                             const std::string& r2) {
  SwapJudgment sj;
  sj.forward = judge.judge(instruction, r1, r2);
  sj.reverse = judge.judge(instruction, r2, r1);
  sj.errored = !sj.forward.ok() || !sj.reverse.ok();
  sj.consistent = !sj.errored && is_consistent(*sj.forward.verdict, *sj.reverse.verdict);
  return sj;
}

Label compare_to_reference(PairJudge& judge, const std::string& instruction, const std::string& response,
                           const std::string& reference) {
  const auto sj = judge_with_swap(judge, instruction, response, reference);
  sj.forward.verdict_or_throw();
  sj.reverse.verdict_or_throw();
  if (!sj.consistent) {
    throw Error(ErrorKind::InconsistentJudgment,
                "forward " + std::string(label_name(*sj.forward.verdict)) + ", reverse " +
                    std::string(label_name(*sj.reverse.verdict)));
  }
  return *sj.forward.verdict;
}

void to_json(Json& j, const DumpRow& r) {
  j = Json{{"pair_id", r.pair_id},
           {"orientation", r.orientation == Orientation::Forward ? "forward" : "reverse"},
           {"verdict", r.verdict ? Json(*r.verdict) : Json(nullptr)},
           {"parse_path", parse_path_name(r.parse_path)},
           {"raw", r.raw}};
}

void from_json(const Json& j, DumpRow& r) {
  r.pair_id = j.at("pair_id").get<std::string>();
  const auto o = j.at("orientation").get<std::string>();
  if (o != "forward" && o != "reverse") throw Error(ErrorKind::InvalidArgument, "unknown orientation '" + o + "'");
  r.orientation = o == "forward" ? Orientation::Forward : Orientation::Reverse;
  r.verdict.reset();
  if (!j.at("verdict").is_null()) r.verdict = j.at("verdict").get<Label>();
  r.parse_path = parse_parse_path(j.at("parse_path").get<std::string>());
  r.raw = j.value("raw", "");
  if (r.verdict.has_value() == (r.parse_path == ParsePath::Failed)) {
    throw Error(ErrorKind::InvalidArgument, "dump row " + r.pair_id + ": verdict and parse_path disagree");
  }
}

std::vector<DumpRow> dump_rows(const std::string& pair_id, const SwapJudgment& sj) {
  return {DumpRow{pair_id, Orientation::Forward, sj.forward.verdict, sj.forward.parse_path, sj.forward.raw},
          DumpRow{pair_id, Orientation::Reverse, sj.reverse.verdict, sj.reverse.parse_path, sj.reverse.raw}};
}

}  // namespace pairjudge::judge
