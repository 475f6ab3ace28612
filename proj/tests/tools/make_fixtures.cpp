// Authors the bundled test fixtures. Run once; the outputs are committed.
//
//   make_fixtures <tests/fixtures dir>
//
// pipeline/: three small sources (50 usable instructions), run.toml, and a
//   mock script recorded from a scripted backend while running every
//   gateway-backed stage, so the CLI replays offline.
// cindex/: a 1,000-sentence toy corpus, 100 probes and 100 extra documents.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "pairjudge/baselines.hpp"
#include "pairjudge/config.hpp"
#include "pairjudge/gateway.hpp"
#include "pairjudge/jsonl.hpp"
#include "pairjudge/pipeline.hpp"
#include "pairjudge/rng.hpp"
#include "pairjudge/text.hpp"

namespace fs = std::filesystem;
using namespace pairjudge;

namespace {

const std::vector<std::string> kTopics = {
    "lighthouse", "teapot",   "glacier",   "subway",     "orchard",   "violin",    "desert",   "library",
    "kite",       "harbor",   "clocktower", "lantern",   "bicycle",   "volcano",   "garden",   "compass",
    "snowfall",   "market",   "telescope", "river",      "bakery",    "thunderstorm", "attic", "canyon",
    "carousel",   "moth",     "typewriter", "bridge",    "meadow",    "satellite", "umbrella", "mailbox",
    "chessboard", "fog",      "cathedral", "beehive",    "windmill",  "aquarium",  "mirror",   "staircase",
    "piano",      "coral",    "railway",   "scarecrow",  "observatory", "candle",  "anchor",   "greenhouse",
    "hourglass",  "fountain", "quarry",    "pinecone"};

const std::vector<std::string> kAdjectives = {"amber",   "restless", "hollow", "silver",  "patient",
                                              "crooked", "velvet",   "feral",  "quiet",   "electric",
                                              "salted",  "borrowed", "paper",  "stubborn", "molten"};
const std::vector<std::string> kNouns = {"echoes", "ledgers", "sparrows", "embers", "maps",  "whispers",
                                         "keys",   "threads", "pebbles",  "tides",  "ghosts", "lanterns",
                                         "seeds",  "wires",   "feathers"};

std::uint64_t h(std::string_view s) { return baselines::fnv1a(s); }

const std::string& pick(const std::vector<std::string>& v, std::uint64_t x) { return v[x % v.size()]; }

std::string between(const std::string& s, const std::string& a, const std::string& b) {
  const auto i = s.find(a);
  if (i == std::string::npos) return {};
  const auto start = i + a.size();
  const auto j = s.find(b, start);
  return s.substr(start, j == std::string::npos ? std::string::npos : j - start);
}

std::size_t distinct_words(const std::string& s) {
  const auto words = text::split_units(s, text::Unit::Word);
  return std::set<std::string>(words.begin(), words.end()).size();
}

// Scripted replies keyed on model id and prompt contents.
Json scripted_reply(const Json& env) {
  const auto kind = env.at("kind").get<std::string>();
  const auto model = env.at("model").get<std::string>();
  if (kind == "logprobs") {
    Json out = Json::array();
    for (const auto& w : text::split_units(env.at("text").get<std::string>(), text::Unit::Word)) {
      out.push_back({{"token", w}, {"logprob", -(0.5 + static_cast<double>(h(w) % 200) / 80.0)}});
    }
    return out;
  }
  if (kind == "embed") {
    Json out = Json::array();
    for (const auto& u : env.at("input")) {
      Json vec = Json::array();
      const auto x = h(u.get<std::string>());
      for (int d = 0; d < 8; ++d) vec.push_back(static_cast<double>((x >> (d * 8)) & 0xff) / 255.0 - 0.5);
      out.push_back(vec);
    }
    return out;
  }
  const auto prompt = env.at("messages").at(0).at("content").get<std::string>();
  const auto seed = env.at("seed").is_null() ? 0 : env.at("seed").get<std::int64_t>();
  const auto n = static_cast<std::uint64_t>(seed) % 9973;

  if (model == "gate-model") {
    const auto t = between(prompt, "### Text: ", "\n### Your reply:");
    const int score = h(t) % 8 == 0 ? 3 : 5;
    return Json{{"analysis", "Imagery is " + std::string(score > 4 ? "fresh" : "ordinary") + "."}, {"score", score}}
        .dump();
  }
  if (model == "instr-model") {
    const auto answer = between(prompt, "Answer: ", "\nPossible question:");
    const auto words = text::split_units(answer, text::Unit::Word);
    std::string head;
    for (std::size_t i = 0; i < std::min<std::size_t>(3, words.size()); ++i) head += (i ? " " : "") + words[i];
    return "\"Write an aphorism that begins with: " + head + "\"";
  }
  if (model == "judge-model") {
    const auto r1 = between(prompt, "Response 1: ", "\n\nResponse 2: ");
    const auto r2 = between(prompt, "\n\nResponse 2: ", "\n\nWrite a one-line");
    const auto s1 = distinct_words(r1), s2 = distinct_words(r2);
    const std::string v = s1 > s2 ? "1" : s1 < s2 ? "2" : "TIE";
    return "The richer vocabulary decides it.\nVERDICT: " + v;
  }
  const auto instruction = between(prompt, "Instruction: ", "\nYour reply:");
  const auto x = h(instruction + std::to_string(seed));
  if (model == "enhancer-model") {
    return "A " + pick(kAdjectives, x) + " reinvention: " + instruction + " becomes " + pick(kNouns, x >> 8) +
           " braided with " + pick(kAdjectives, x >> 16) + " " + pick(kNouns, x >> 24) + ", refrain " +
           std::to_string(n) + ".";
  }
  const bool creative = prompt.find("creative expert") != std::string::npos;
  if (creative) {
    return model + " imagines it anew: " + instruction + " as " + pick(kAdjectives, x) + " " + pick(kNouns, x >> 8) +
           " and " + pick(kAdjectives, x >> 16) + " " + pick(kNouns, x >> 24) + ", variation " + std::to_string(n) +
           ".";
  }
  return model + " answers plainly: " + instruction + " Draft " + std::to_string(n) + ".";
}

void write_lines(const fs::path& p, const std::vector<std::string>& lines) {
  std::ofstream out(p, std::ios::binary);
  for (const auto& l : lines) out << l << "\n";
}

void make_pipeline(const fs::path& dir) {
  fs::create_directories(dir / "sources");
  // Type A: 20 creative pairs plus two malformed lines.
  std::vector<std::string> a;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto& t = kTopics[i];
    const auto x = h(t);
    a.push_back(jsonl::dump(Json{
        {"prompt", "Write a two-line poem about the " + t + "."},
        {"poem", "The " + t + " keeps " + pick(kNouns, x) + " under a " + pick(kAdjectives, x >> 8) + " moon,\n" +
                     "and lends its " + pick(kAdjectives, x >> 16) + " " + pick(kNouns, x >> 24) + " to the dawn."},
        {"genre", "poetry"}}));
    if (i == 6) a.push_back("{\"prompt\": \"unterminated");
    if (i == 13) a.push_back("[1, 2, 3]");
  }
  write_lines(dir / "sources" / "poems.jsonl", a);

  // Type B: 15 response-only aphorisms.
  std::vector<std::string> b;
  for (std::size_t i = 20; i < 35; ++i) {
    const auto& t = kTopics[i];
    const auto x = h(t);
    b.push_back(jsonl::dump(Json{{"text", "Every " + t + " is a " + pick(kAdjectives, x) + " promise: it hoards " +
                                              pick(kNouns, x >> 8) + " until someone asks the right question."}}));
  }
  write_lines(dir / "sources" / "aphorisms.jsonl", b);

  // Type C: 15 ordinary question-answer pairs.
  std::vector<std::string> c;
  for (std::size_t i = 35; i < 50; ++i) {
    const auto& t = kTopics[i];
    c.push_back(jsonl::dump(Json{{"question", "Describe what a " + t + " is used for."},
                                 {"answer", "A " + t + " is a common object with a practical everyday purpose."}}));
  }
  write_lines(dir / "sources" / "qa.jsonl", c);

  const std::string toml = R"(# 50-instruction pipeline fixture. Replay with --mock mock.jsonl.
seed = 42
out_dir = "out"

[gateway]
concurrency = 1

[models]
instruction = "instr-model"
gate = "gate-model"
enhancer = "enhancer-model"
embed = "embed-model"
ppl = "ppl-model"

[sources.poems]
path = "sources/poems.jsonl"
kind = "A_EXISTING_CREATIVE"
instruction_field = "prompt"
response_field = "poem"
domain_field = "genre"
language = "en"

[sources.aphorisms]
path = "sources/aphorisms.jsonl"
kind = "B_CREATIVITY_DENSE"
instruction_field = ""
response_field = "text"
domain = "aphorism"
language = "en"

[sources.qa]
path = "sources/qa.jsonl"
kind = "C_ORDINARY_PAIR"
instruction_field = "question"
response_field = "answer"
domain = "qa"
language = "en"

[[generators]]
model_id = "gen-small"
tier = 1
prompt_kind = "ORDINARY"

[[generators]]
model_id = "gen-small"
tier = 1
prompt_kind = "CREATIVE"

[[generators]]
model_id = "gen-large"
tier = 2
prompt_kind = "ORDINARY"

[[generators]]
model_id = "gen-large"
tier = 2
prompt_kind = "CREATIVE"

[gate]
threshold = 4

[augment]
k = 5

[pairs]
negative_rate = 0.1
export_variant = "FULL"

[judge]
model = "judge-model"

[baseline]
tie_band = 0.02

[dpo]
variant = "E70H30"
)";
  jsonl::write_file(dir / "run.toml", toml);

  auto cfg = RunConfig::load(dir / "run.toml");
  const auto scratch = fs::temp_directory_path() / "pairjudge-fixture-run";
  fs::remove_all(scratch);
  cfg.out_dir = scratch;

  auto recorder = std::make_shared<gateway::RecordingBackend>(std::make_shared<gateway::FunctionBackend>(scripted_reply));
  auto gw = std::make_shared<gateway::Gateway>(recorder, 1);
  pipeline::Context ctx(cfg);
  ctx.use_gateway(gw);
  std::cout << pipeline::run_ingest(ctx).dump() << "\n";
  std::cout << pipeline::run_standardize(ctx).dump() << "\n";
  std::cout << pipeline::run_augment(ctx).dump() << "\n";
  std::cout << pipeline::run_label(ctx).dump() << "\n";
  std::cout << pipeline::run_tournament(ctx).dump() << "\n";
  std::cout << pipeline::run_dpo_export(ctx).dump() << "\n";

  // A small gold file over the first response sets, so judge and the
  // gateway-backed baselines also replay offline.
  std::vector<Json> gold;
  const auto sets = jsonl::read_as<synthesis::ResponseSet>(ctx.out(pipeline::files::kResponseSets));
  for (std::size_t s = 0; s < 8 && s < sets.size(); ++s) {
    const auto& rs = sets[s];
    for (std::size_t i = 0; i + 1 < rs.candidates.size() && i < 3; ++i) {
      const double m1 = 1.0 + static_cast<double>(h(rs.candidates[i].text) % 31) / 10.0;
      const double m2 = 1.0 + static_cast<double>(h(rs.candidates[i + 1].text) % 31) / 10.0;
      gold.push_back(Json{{"group", rs.sample_id.substr(0, 8)},
                          {"instruction", rs.instruction},
                          {"r1", rs.candidates[i].text},
                          {"r2", rs.candidates[i + 1].text},
                          {"mean1", m1},
                          {"mean2", m2}});
    }
  }
  jsonl::write(dir / "gold.jsonl", gold);
  std::cout << pipeline::run_judge(ctx, dir / "gold.jsonl").dump() << "\n";
  std::cout << pipeline::run_baseline(ctx, dir / "gold.jsonl", baselines::Metric::Ppl).dump() << "\n";
  std::cout << pipeline::run_baseline(ctx, dir / "gold.jsonl", baselines::Metric::Dsi).dump() << "\n";

  jsonl::write(dir / "mock.jsonl", recorder->script());
  std::cout << "recorded " << recorder->script().size() << " replies\n";
  fs::remove_all(scratch);
}

std::string sentence(Rng& rng, const std::vector<std::string>& vocab, std::size_t lo, std::size_t hi) {
  const auto len = lo + rng.below(hi - lo + 1);
  std::string s;
  for (std::size_t i = 0; i < len; ++i) s += (i ? " " : "") + vocab[rng.below(vocab.size())];
  return s;
}

void make_cindex(const fs::path& dir) {
  fs::create_directories(dir);
  Rng rng(derive_seed(42, "fixture/cindex"));
  // A small vocabulary so that random sentences share many short n-grams.
  std::vector<std::string> vocab;
  for (const auto& a : kAdjectives) vocab.push_back(a);
  for (const auto& n : kNouns) vocab.push_back(n);
  for (const char* w : {"the", "a", "of", "under", "beside", "keeps", "sings", "folds", "drifts", "waits"}) {
    vocab.push_back(w);
  }
  std::vector<std::string> corpus;
  for (int i = 0; i < 1000; ++i) corpus.push_back(sentence(rng, vocab, 6, 14));
  write_lines(dir / "corpus.txt", corpus);

  std::vector<std::string> extra;
  for (int i = 0; i < 100; ++i) extra.push_back(sentence(rng, vocab, 6, 14));
  write_lines(dir / "extra.txt", extra);

  std::vector<std::string> disjoint_vocab;
  for (int i = 0; i < 40; ++i) disjoint_vocab.push_back("zq" + std::to_string(i) + "x");

  // 30 verbatim corpus sentences, 20 disjoint, 50 recombined.
  std::vector<Json> probes;
  for (int i = 0; i < 30; ++i) {
    probes.push_back({{"kind", "verbatim"}, {"text", corpus[rng.below(corpus.size())]}});
  }
  for (int i = 0; i < 20; ++i) probes.push_back({{"kind", "disjoint"}, {"text", sentence(rng, disjoint_vocab, 6, 14)}});
  for (int i = 0; i < 50; ++i) {
    // Splice a corpus fragment between fresh words, or draw a fresh sentence.
    std::string t;
    if (i % 2 == 0) {
      const auto words = text::split_units(corpus[rng.below(corpus.size())], text::Unit::Word);
      t = sentence(rng, vocab, 2, 4) + " ";
      for (std::size_t w = 0; w < std::min<std::size_t>(6, words.size()); ++w) t += words[w] + " ";
      t += sentence(rng, disjoint_vocab, 1, 3);
    } else {
      t = sentence(rng, vocab, 8, 16);
    }
    probes.push_back({{"kind", "mixed"}, {"text", t}});
  }
  jsonl::write(dir / "probes.jsonl", probes);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <fixtures dir>\n";
    return 1;
  }
  const fs::path root = fs::absolute(argv[1]);
  make_pipeline(root / "pipeline");
  make_cindex(root / "cindex");
  return 0;
}
