#include "pairjudge/templates.hpp"

#include "pairjudge/digest.hpp"
#include "pairjudge/error.hpp"
#include "pairjudge/jsonl.hpp"

namespace pairjudge {

namespace {

constexpr std::string_view kOrdinaryEn =
    R"(Answer the instruction below in roughly {{len}} words. Output the answer and nothing else.
Instruction: {{instruction}}
Your reply:)";

constexpr std::string_view kOrdinaryZh =
    "请用大约{{len}}字回答下面的指令，只输出回答本身。\n"
    "指令：{{instruction}}\n"
    "你的回复：";

constexpr std::string_view kCreativeEn =
    R"(Act as a creative expert and give the most inventive answer you can to the instruction below: something fresh and surprising that still makes sense. Aim for roughly {{len}} words. Output the answer and nothing else.
Instruction: {{instruction}}
Your reply:)";

constexpr std::string_view kCreativeZh =
    "请以创意写作者的身份，用尽量新颖独到、同时言之有物的方式回答下面的指令，篇幅约{{len}}字，只输出回答本身。\n"
    "指令：{{instruction}}\n"
    "你的回复：";

// Used for the strong rewrite of ordinary pairs; no length target on purpose.
constexpr std::string_view kEnhanceEn =
    R"(Write an answer to the instruction below that is as inventive as you can make it.
Devices that tend to help: unexpected vocabulary, unusual sentence shapes, sound patterns such as rhyme or alliteration, wordplay and allusion.
Stay faithful to the instruction. Any length is fine if it serves the idea. Output the answer and nothing else.

Instruction: {{instruction}}
Your reply:)";

constexpr std::string_view kEnhanceZh =
    "请尽可能有创意地回答下面的指令。\n"
    "可以借助少见的措辞、不寻常的句式、押韵或双声叠韵、双关与典故等手法。\n"
    "内容须紧扣指令，篇幅不限。只输出回答本身。\n"
    "指令：{{instruction}}\n"
    "你的回复：";

constexpr std::string_view kGateEn =
    R"(### Task
Rate how creative the following {{category}} is, as an integer from 1 (flat, formulaic) to 6 (striking and original).
Consider diction, word order, syntax, imagery, symbolism and rhetorical devices. Plain statements, heavy repetition and stock phrasing score low. A text you would call merely average gets 3 or less.
Reply with a JSON object holding exactly two fields, "analysis" (a short critique) and "score", and nothing else.

### Text: {{text}}
### Your reply:)";

constexpr std::string_view kGateZh =
    "### 任务\n"
    "请为下面这段{{category}}的创意程度打分，取1到6的整数：1表示平淡套路，6表示新颖出众。\n"
    "可从措辞、语序、句法、意象、象征和修辞等角度考察。平铺直叙、大量重复或陈词滥调给低分；若只算一般，分数不超过3。\n"
    "只回复一个JSON对象，恰含\"analysis\"（简短评析）和\"score\"两个字段，不要输出其他内容。\n"
    "### 文本：{{text}}\n"
    "### 你的回复：";

constexpr std::string_view kInstructionEn =
    "Here is an answer. Write the instruction or question that most likely produced it. Output only that question.\n"
    "Answer: {{response}}\n"
    "Possible question:";

constexpr std::string_view kInstructionZh =
    "下面是一段回答，请写出最可能引出它的提问，只输出问题本身。\n"
    "回答：{{response}}\n"
    "可能的问题：";

// Pairwise judge prompt (version pinned by TemplateSet::version()).
constexpr std::string_view kJudgeEn =
    R"(You are an expert judge of creativity. Compare the two responses to the same instruction and decide which one is more creative, meaning novel, clever, and meaningful for this instruction. Judge creativity only; length and position are irrelevant.

Instruction: {{instruction}}

Response 1: {{response1}}

Response 2: {{response2}}

Write a one-line analysis. Then write the final line exactly as one of:
VERDICT: 1
VERDICT: 2
VERDICT: TIE)";

constexpr std::string_view kJudgeZh =
    "你是一名创意评审专家。请比较同一指令下的两个回复，判断哪一个更有创意，即对该指令而言更新奇、巧妙且有意义。只评判创意，与长度和顺序无关。\n\n"
    "指令：{{instruction}}\n\n"
    "回复1：{{response1}}\n\n"
    "回复2：{{response2}}\n\n"
    "先写一行简要分析，最后一行严格写成以下之一：\n"
    "VERDICT: 1\n"
    "VERDICT: 2\n"
    "VERDICT: TIE";

}  // namespace

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, open - pos));
    const std::string name(tmpl.substr(open + 2, close - open - 2));
    auto it = vars.find(name);
    if (it == vars.end()) {
      throw Error(ErrorKind::InvalidArgument, "template placeholder {{" + name + "}} has no value");
    }
    out.append(it->second);
    pos = close + 2;
  }
  return out;
}

std::string template_language(std::string_view tag) {
  return tag.substr(0, 2) == "zh" ? "zh" : "en";
}

TemplateSet::TemplateSet() {
  set("ordinary", "en", std::string(kOrdinaryEn));
  set("ordinary", "zh", std::string(kOrdinaryZh));
  set("creative", "en", std::string(kCreativeEn));
  set("creative", "zh", std::string(kCreativeZh));
  set("enhance", "en", std::string(kEnhanceEn));
  set("enhance", "zh", std::string(kEnhanceZh));
  set("gate", "en", std::string(kGateEn));
  set("gate", "zh", std::string(kGateZh));
  set("instruction", "en", std::string(kInstructionEn));
  set("instruction", "zh", std::string(kInstructionZh));
  set("judge", "en", std::string(kJudgeEn));
  set("judge", "zh", std::string(kJudgeZh));
}

void TemplateSet::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::FileMissing, "template directory " + dir.string());
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    const auto stem = entry.path().stem().string();  // <id>.<lang>
    const auto dot = stem.rfind('.');
    if (dot == std::string::npos) continue;
    auto body = jsonl::read_file(entry.path());
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
    set(stem.substr(0, dot), stem.substr(dot + 1), std::move(body));
  }
}

const std::string& TemplateSet::get(std::string_view id, std::string_view language) const {
  auto it = templates_.find({std::string(id), std::string(language)});
  if (it == templates_.end()) it = templates_.find({std::string(id), "en"});
  if (it == templates_.end()) {
    throw Error(ErrorKind::InvalidConfig, "no template '" + std::string(id) + "'");
  }
  return it->second;
}

void TemplateSet::set(std::string id, std::string language, std::string text) {
  templates_[{std::move(id), std::move(language)}] = std::move(text);
}

std::string TemplateSet::version() const {
  std::string all;
  for (const auto& [key, body] : templates_) {
    all += length_prefixed({key.first, key.second, body});
  }
  return sha256_hex(all).substr(0, 16);
}

}  // namespace pairjudge
