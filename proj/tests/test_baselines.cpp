#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "pairjudge/baselines.hpp"
#include "pairjudge/error.hpp"
#include "pairjudge/jsonl.hpp"
#include "pairjudge/rng.hpp"

namespace fs = std::filesystem;
using namespace pairjudge;
using namespace pairjudge::baselines;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no pairjudge::Error thrown";
  return ErrorKind::InvalidArgument;
}

std::string join(const std::vector<std::string>& units, const char* sep = " ") {
  std::string s;
  for (std::size_t i = 0; i < units.size(); ++i) s += (i ? sep : "") + units[i];
  return s;
}

std::vector<std::string> random_words(Rng& rng, std::size_t n, std::size_t vocab) {
  static const char* words[] = {"sun", "moon", "rain", "wind", "leaf", "stone", "river", "cloud"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(words[rng.below(vocab)]);
  return out;
}

// Deterministic pseudo-embedding per unit.
std::vector<double> embed_of(const std::string& u) {
  std::vector<double> v;
  auto h = fnv1a(u);
  for (int i = 0; i < 6; ++i) {
    v.push_back(static_cast<double>(h % 1000) / 1000.0 - 0.3);
    h = fnv1a(u, h);
  }
  return v;
}

gateway::Gateway embedding_gateway() {
  return gateway::Gateway(std::make_shared<gateway::FunctionBackend>([](const Json& env) {
    Json out = Json::array();
    for (const auto& u : env.at("input")) out.push_back(embed_of(u.get<std::string>()));
    return out;
  }));
}

}  // namespace

TEST(Ppl, ExpOfNegativeMeanLogprob) {
  gateway::Gateway gw(std::make_shared<gateway::FunctionBackend>([](const Json&) {
    return Json::parse(R"([{"token":"a","logprob":-1.0},{"token":"b","logprob":-2.0},{"token":"c","logprob":-3.0}])");
  }));
  EXPECT_NEAR(ppl("a b c", gw, "lm"), std::exp(2.0), 1e-12);
  EXPECT_EQ(kind_of([&] { ppl("  ", gw, "lm"); }), ErrorKind::EmptyInput);
  gateway::Gateway none(std::make_shared<gateway::FunctionBackend>([](const Json&) { return Json::array(); }));
  EXPECT_EQ(kind_of([&] { ppl("x", none, "lm"); }), ErrorKind::EmptyInput);
}

TEST(Dsi, MeanPairwiseCosineDistanceMatchesOracle) {
  auto gw = embedding_gateway();
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto words = random_words(rng, 2 + rng.below(8), 8);
    const auto text = join(words);
    double sum = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < words.size(); ++i)
      for (std::size_t j = i + 1; j < words.size(); ++j, ++n) sum += oracle::cosine_distance(embed_of(words[i]), embed_of(words[j]));
    ASSERT_NEAR(dsi(text, gw, "e", Granularity::Token), sum / static_cast<double>(n), 1e-12) << text;
  }
}

TEST(Dsi, SegmentsAndTooFewUnits) {
  auto gw = embedding_gateway();
  EXPECT_EQ(dsi_units("Rain falls. Wind sings, softly", Granularity::Segment).size(), 3u);
  EXPECT_EQ(dsi_units("雨落", Granularity::Token).size(), 2u);
  EXPECT_EQ(kind_of([&] { dsi("One clause only", gw, "e", Granularity::Segment); }), ErrorKind::TooFewUnits);
  EXPECT_EQ(parse_granularity("TOKEN"), Granularity::Token);
  EXPECT_EQ(kind_of([] { parse_granularity("WORD"); }), ErrorKind::InvalidArgument);
}

TEST(CreativityIndex, MatchesNaiveCoverageOracle) {
  Rng rng(31);
  for (int trial = 0; trial < 150; ++trial) {
    const auto vocab = 2 + rng.below(5);
    std::vector<std::vector<std::string>> docs;
    std::vector<std::string> corpus;
    for (std::size_t d = 0, nd = 1 + rng.below(4); d < nd; ++d) {
      docs.push_back(random_words(rng, 3 + rng.below(12), vocab));
      corpus.push_back(join(docs.back()));
    }
    const std::size_t n_min = 2 + rng.below(2);
    const std::size_t n_max = n_min + rng.below(4);
    const auto idx = build_index(corpus, n_min, n_max, text::Unit::Word);
    const std::size_t L = n_min + rng.below(n_max - n_min + 1);
    const auto words = random_words(rng, L + rng.below(15), vocab);
    ASSERT_NEAR(creativity_index(join(words), idx, L), oracle::creativity_index(words, docs, L), 1e-12)
        << join(words) << " L=" << L;
  }
}

TEST(CreativityIndex, CodePointUnitsAndEdgeCases) {
  const auto idx = build_index({"春眠不觉晓处处闻啼鸟"}, 2, 4, text::Unit::CodePoint);
  EXPECT_DOUBLE_EQ(creativity_index("春眠不觉", idx, 2), 0.0);
  EXPECT_DOUBLE_EQ(creativity_index("夜来风雨", idx, 2), 1.0);
  EXPECT_DOUBLE_EQ(creativity_index("春眠夜来", idx, 2), 0.5);
  EXPECT_EQ(kind_of([&] { creativity_index("春", idx, 2); }), ErrorKind::TextTooShort);
  EXPECT_EQ(kind_of([&] { creativity_index("春眠不觉", idx, 5); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { build_index({}, 2, 3, text::Unit::Word); }), ErrorKind::EmptyCorpus);
  EXPECT_EQ(kind_of([] { build_index({"a b"}, 1, 3, text::Unit::Word); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { build_index({"a b"}, 4, 3, text::Unit::Word); }), ErrorKind::InvalidArgument);
}

TEST(Index, SaveLoadRoundTripAndCorruption) {
  const auto dir = fs::temp_directory_path() / "pairjudge-index";
  fs::remove_all(dir);
  const auto idx = build_index({"the quick brown fox", "jumps over the lazy dog"}, 2, 3, text::Unit::Word);
  idx.save(dir / "i.idx");
  const auto back = NGramIndex::load(dir / "i.idx");
  EXPECT_EQ(back, idx);
  EXPECT_EQ(back.documents(), 2u);
  EXPECT_EQ(fs::file_size(dir / "i.idx"), 64 + 8 * idx.size());

  const auto bytes = jsonl::read_file(dir / "i.idx");
  auto write = [&](const std::string& b) {
    std::ofstream os(dir / "bad.idx", std::ios::binary | std::ios::trunc);
    os.write(b.data(), static_cast<std::streamsize>(b.size()));
  };
  write(bytes.substr(0, bytes.size() - 3));
  EXPECT_EQ(kind_of([&] { NGramIndex::load(dir / "bad.idx"); }), ErrorKind::IndexFormat);
  write(bytes + "x");
  EXPECT_EQ(kind_of([&] { NGramIndex::load(dir / "bad.idx"); }), ErrorKind::IndexFormat);
  write("NOTANIDX" + bytes.substr(8));
  EXPECT_EQ(kind_of([&] { NGramIndex::load(dir / "bad.idx"); }), ErrorKind::IndexFormat);
  auto huge = bytes;
  for (int i = 56; i < 64; ++i) huge[static_cast<std::size_t>(i)] = '\xff';  // hash count
  write(huge);
  EXPECT_EQ(kind_of([&] { NGramIndex::load(dir / "bad.idx"); }), ErrorKind::IndexFormat);
  auto unsorted = bytes;
  std::swap_ranges(unsorted.begin() + 64, unsorted.begin() + 72, unsorted.begin() + 72);
  write(unsorted);
  EXPECT_EQ(kind_of([&] { NGramIndex::load(dir / "bad.idx"); }), ErrorKind::IndexFormat);
  EXPECT_EQ(kind_of([&] { NGramIndex::load(dir / "missing.idx"); }), ErrorKind::FileMissing);
}

TEST(ScalarVerdict, RelativeTieBand) {
  ScalarVerdictRule r{Metric::CIndex, 0.1};
  EXPECT_EQ(scalar_verdict(1.0, 0.95, r), Label::Tie);
  EXPECT_EQ(scalar_verdict(1.0, 0.8, r), Label::First);
  EXPECT_EQ(scalar_verdict(0.8, 1.0, r), Label::Second);
  EXPECT_EQ(scalar_verdict(0.0, 0.0, r), Label::Tie);
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const double a = rng.unit() * 10, b = rng.unit() * 10;
    ASSERT_EQ(scalar_verdict(b, a, r), complement(scalar_verdict(a, b, r)));
  }
  EXPECT_EQ(kind_of([] { ScalarVerdictRule{Metric::Ppl, 1.0}.validate(); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([&] { scalar_verdict(NAN, 1.0, r); }), ErrorKind::InvalidArgument);
}

TEST(ScalarJudge, MemoizesAndFailsUnscorableTexts) {
  int calls = 0;
  ScalarJudge j({Metric::Dsi, 0.0}, [&](const std::string& t) -> double {
    ++calls;
    if (t == "short") throw Error(ErrorKind::TooFewUnits, "one unit");
    if (t == "boom") throw Error(ErrorKind::EndpointUnreachable, "down");
    return static_cast<double>(t.size());
  });
  EXPECT_EQ(j.judge("i", "longer", "abc").verdict, Label::First);
  EXPECT_EQ(j.judge("i", "abc", "longer").verdict, Label::Second);
  EXPECT_EQ(calls, 2);
  const auto f = j.judge("i", "short", "abc");
  EXPECT_FALSE(f.ok());
  EXPECT_EQ(f.parse_path, judge::ParsePath::Failed);
  EXPECT_EQ(kind_of([&] { j.judge("i", "boom", "abc"); }), ErrorKind::EndpointUnreachable);
  EXPECT_EQ(j.id(), "DSI");
  EXPECT_EQ(parse_metric("PPL"), Metric::Ppl);
}
