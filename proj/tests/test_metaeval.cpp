#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "pairjudge/error.hpp"
#include "pairjudge/jsonl.hpp"
#include "pairjudge/metaeval.hpp"
#include "pairjudge/rng.hpp"

namespace fs = std::filesystem;
using namespace pairjudge;
using namespace pairjudge::metaeval;

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

std::vector<Label> random_labels(Rng& rng, std::size_t n, std::size_t classes) {
  std::vector<Label> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(oracle::kClasses[rng.below(classes)]);
  return v;
}

GoldPair gp(const std::string& id, const std::string& group, GoldLabel label) {
  GoldPair g;
  g.pair_id = id;
  g.group = group;
  g.instruction = "instr " + id;
  g.r1 = "a " + id;
  g.r2 = "b " + id;
  g.label = label;
  return g;
}

judge::DumpRow row(const std::string& id, judge::Orientation o, std::optional<Label> v) {
  judge::DumpRow r;
  r.pair_id = id;
  r.orientation = o;
  r.verdict = v;
  r.parse_path = v ? judge::ParsePath::Tag : judge::ParsePath::Failed;
  return r;
}

}  // namespace

TEST(Agreement, MatchesOracleOnRandomLabelings) {
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = 1 + rng.below(40);
    const auto classes = 1 + rng.below(3);
    const auto pred = random_labels(rng, n, classes), gold = random_labels(rng, n, 1 + rng.below(3));
    const auto c = confusion(pred, gold);
    ASSERT_EQ(c.total(), n);
    ASSERT_NEAR(macro_f1(c), oracle::macro_f1(pred, gold), 1e-12);
    ASSERT_NEAR(cohen_kappa(c), oracle::kappa(pred, gold), 1e-12);
    ASSERT_NEAR(agreement(c), oracle::agreement(pred, gold), 1e-12);
  }
}

TEST(Agreement, PerfectAndDegenerateCases) {
  const std::vector<Label> g{Label::First, Label::Second, Label::Tie, Label::First};
  const auto c = confusion(g, g);
  EXPECT_DOUBLE_EQ(macro_f1(c), 1.0);
  EXPECT_DOUBLE_EQ(cohen_kappa(c), 1.0);
  const std::vector<Label> all_first(4, Label::First);
  // chance agreement of 1: kappa is defined as 0
  EXPECT_DOUBLE_EQ(cohen_kappa(confusion(all_first, all_first)), 0.0);
  // absent classes still count in the macro mean
  EXPECT_NEAR(macro_f1(confusion(all_first, all_first)), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(kind_of([&] { confusion({Label::First}, g); }), ErrorKind::LengthMismatch);
  EXPECT_EQ(kind_of([] { confusion({}, {}); }), ErrorKind::EmptyInput);
}

TEST(Agreement, WeightedF1UsesGoldSupport) {
  const std::vector<Label> gold{Label::First, Label::First, Label::First, Label::Second};
  const std::vector<Label> pred{Label::First, Label::First, Label::Second, Label::Second};
  const auto c = confusion(pred, gold);
  const double f_first = oracle::class_f1(pred, gold, Label::First);
  const double f_second = oracle::class_f1(pred, gold, Label::Second);
  EXPECT_NEAR(weighted_f1(c), (3 * f_first + f_second) / 4, 1e-12);
  EXPECT_NEAR(f1(c, F1Average::Macro), (f_first + f_second) / 3, 1e-12);
}

TEST(Consistency, ComplementRate) {
  EXPECT_DOUBLE_EQ(consistency_rate({Label::First, Label::Tie, Label::Second, Label::First},
                                    {Label::Second, Label::Tie, Label::Second, Label::First}),
                   0.5);
  EXPECT_EQ(kind_of([] { consistency_rate({Label::First}, {}); }), ErrorKind::LengthMismatch);
}

TEST(Icc, MatchesAnovaOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = 2 + rng.below(12), k = 2 + rng.below(5);
    RatingMatrix m(n, std::vector<double>(k));
    for (auto& r : m)
      for (auto& x : r) x = static_cast<double>(1 + rng.below(5));
    double expected;
    try {
      expected = oracle::icc_2k(m);
    } catch (...) {
      continue;
    }
    if (!std::isfinite(expected)) continue;
    double got;
    try {
      got = icc_2k(m);
    } catch (const Error& e) {
      ASSERT_EQ(e.kind(), ErrorKind::DegenerateVariance);
      continue;
    }
    ASSERT_NEAR(got, expected, 1e-9);
  }
}

TEST(Icc, PublishedTextbookExample) {
  // Six targets rated by four judges; the classic ICC(2,k) is 0.62.
  const RatingMatrix m{{9, 2, 5, 8}, {6, 1, 3, 2}, {8, 4, 6, 8}, {7, 1, 2, 6}, {10, 5, 6, 9}, {6, 2, 4, 7}};
  EXPECT_NEAR(icc_2k(m), 0.62, 0.005);
}

TEST(Icc, Errors) {
  EXPECT_EQ(kind_of([] { icc_2k({{1, 2}}); }), ErrorKind::IncompleteMatrix);
  EXPECT_EQ(kind_of([] { icc_2k({{1}, {2}}); }), ErrorKind::IncompleteMatrix);
  EXPECT_EQ(kind_of([] { icc_2k({{1, 2}, {3}}); }), ErrorKind::IncompleteMatrix);
  EXPECT_EQ(kind_of([] { icc_2k({{1, 2}, {3, NAN}}); }), ErrorKind::IncompleteMatrix);
  EXPECT_EQ(kind_of([] { icc_2k({{3, 3}, {3, 3}}); }), ErrorKind::DegenerateVariance);
}

TEST(Gold, StrictThresholdsWithEpsilon) {
  EXPECT_EQ(gold_label(3.0, 2.5), GoldLabel::First);
  EXPECT_EQ(gold_label(2.5, 3.0), GoldLabel::Second);
  EXPECT_EQ(gold_label(3.0, 2.7), GoldLabel::Excluded);  // exactly on the distinct threshold
  EXPECT_EQ(gold_label(0.7, 0.4), GoldLabel::Excluded);  // 0.29999999999999993
  EXPECT_EQ(gold_label(3.0, 2.9), GoldLabel::Excluded);  // exactly on the tie threshold
  EXPECT_EQ(gold_label(3.0, 2.95), GoldLabel::Tie);
  EXPECT_EQ(gold_label(3.0, 2.8), GoldLabel::Excluded);
  EXPECT_EQ(gold_label(3.0, 3.0), GoldLabel::Tie);
  EXPECT_EQ(to_verdict(GoldLabel::Excluded), std::nullopt);
  EXPECT_EQ(parse_gold_label("TIE"), GoldLabel::Tie);
}

TEST(Gold, DerivePairsAndPairings) {
  std::map<std::string, ScoredItem> table;
  for (int i = 0; i < 4; ++i)
    table["p" + std::to_string(i)] = {"p" + std::to_string(i), "poetry", "Write a poem", "poem " + std::to_string(i), 1.0 + i * 0.4};
  for (int i = 0; i < 3; ++i)
    table["s" + std::to_string(i)] = {"s" + std::to_string(i), "slogan", "Write a slogan", "slogan " + std::to_string(i), 2.0};
  const auto all = pair_all_within_group(table);
  EXPECT_EQ(all.size(), 6u + 3u);
  const auto pairs = derive_gold_pairs(table, all);
  EXPECT_EQ(pairs[0].label, GoldLabel::Second);  // p0 (1.0) vs p1 (1.4)
  EXPECT_EQ(pairs.back().label, GoldLabel::Tie);
  EXPECT_EQ(pairs[0].pair_id, pair_id("Write a poem", "poem 0", "poem 1", false));

  const auto sampled = pair_sample_within_group(table, 2, 7);
  EXPECT_EQ(sampled.size(), 4u);
  EXPECT_EQ(sampled, pair_sample_within_group(table, 2, 7));
  for (const auto& [a, b] : sampled) EXPECT_EQ(table.at(a).group, table.at(b).group);

  EXPECT_EQ(kind_of([&] { derive_gold_pairs(table, {{"p0", "zz"}}); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([&] { derive_gold_pairs(table, {{"p0", "s0"}}); }), ErrorKind::InvalidArgument);
}

TEST(SwapAveraged, PerfectOrderAwareJudge) {
  std::vector<GoldPair> gold;
  std::map<std::string, Label> truth;
  const GoldLabel labels[] = {GoldLabel::First, GoldLabel::Second, GoldLabel::Tie, GoldLabel::Excluded};
  for (int i = 0; i < 12; ++i) {
    gold.push_back(gp("g" + std::to_string(i), "x", labels[i % 4]));
    if (auto v = to_verdict(labels[i % 4])) truth[gold.back().r1] = *v;
  }
  Evaluator perfect = [&](const std::string&, const std::string& r1, const std::string& r2) -> std::optional<Label> {
    if (truth.count(r1)) return truth.at(r1);
    return complement(truth.at(r2));
  };
  const auto r = swap_averaged_report(perfect, gold);
  EXPECT_EQ(r.scored, 9u);
  EXPECT_DOUBLE_EQ(r.macro_f1, 1.0);
  EXPECT_DOUBLE_EQ(r.kappa, 1.0);
  EXPECT_DOUBLE_EQ(r.consistency, 1.0);

  // a judge that always says FIRST is perfectly inconsistent outside ties
  Evaluator first = [](const std::string&, const std::string&, const std::string&) -> std::optional<Label> {
    return Label::First;
  };
  const auto b = swap_averaged_report(first, gold);
  EXPECT_DOUBLE_EQ(b.consistency, 0.0);
  EXPECT_EQ(b.forward.confusion.at(Label::First, Label::First), 3u);
  EXPECT_EQ(b.reverse.confusion.at(Label::Second, Label::First), 3u);

  Evaluator never = [](const std::string&, const std::string&, const std::string&) -> std::optional<Label> {
    return std::nullopt;
  };
  EXPECT_EQ(kind_of([&] { swap_averaged_report(never, gold); }), ErrorKind::AllExcluded);
}

TEST(Dump, JoinsOnPairIdAndReportsUnparseable) {
  std::vector<GoldPair> gold{gp("a", "x", GoldLabel::First), gp("b", "x", GoldLabel::Tie),
                             gp("c", "y", GoldLabel::Second), gp("d", "y", GoldLabel::Excluded)};
  using judge::Orientation;
  std::vector<judge::DumpRow> rows{row("a", Orientation::Forward, Label::First), row("a", Orientation::Reverse, Label::Second),
                                   row("b", Orientation::Reverse, Label::Tie),   row("b", Orientation::Forward, std::nullopt),
                                   row("c", Orientation::Forward, Label::Second), row("c", Orientation::Reverse, Label::First)};
  const auto r = evaluate_dump(rows, gold);
  EXPECT_EQ(r.overall.scored, 2u);
  EXPECT_EQ(r.overall.excluded_unparseable, 1u);
  EXPECT_EQ(r.groups.size(), 2u);
  EXPECT_EQ(r.groups.at("x").scored, 1u);

  rows.pop_back();
  EXPECT_EQ(kind_of([&] { evaluate_dump(rows, gold); }), ErrorKind::KeyMismatch);
  rows.push_back(row("c", Orientation::Forward, Label::First));
  EXPECT_EQ(kind_of([&] { evaluate_dump(rows, gold); }), ErrorKind::InvalidArgument);
}

TEST(Dump, GoldenFixtureMatchesIndependentComputation) {
  const fs::path dir = fs::path(PAIRJUDGE_FIXTURES) / "golden";
  std::vector<GoldPair> gold;
  for (const auto& j : jsonl::read_strict(dir / "gold.jsonl")) gold.push_back(j.get<GoldPair>());
  std::vector<judge::DumpRow> rows;
  for (const auto& j : jsonl::read_strict(dir / "verdicts.jsonl")) rows.push_back(j.get<judge::DumpRow>());
  const auto expected = Json::parse(jsonl::read_file(dir / "metric_report.expected.json"));
  const auto got = Json(evaluate_dump(rows, gold));

  auto check = [](const Json& want, const Json& have, const std::string& where) {
    for (const char* k : {"macro_f1", "kappa", "agreement", "consistency"})
      EXPECT_NEAR(have.at(k).get<double>(), want.at(k).get<double>(), 1e-9) << where << " " << k;
    if (want.contains("scored")) {
      EXPECT_EQ(have.at("scored"), want.at("scored")) << where;
      EXPECT_EQ(have.at("excluded_unparseable"), want.at("excluded_unparseable")) << where;
      EXPECT_EQ(have.at("forward").at("confusion"), want.at("forward").at("confusion")) << where;
      EXPECT_EQ(have.at("reverse").at("confusion"), want.at("reverse").at("confusion")) << where;
    }
  };
  check(expected.at("overall"), got.at("overall"), "overall");
  check(expected.at("group_mean"), got.at("group_mean"), "group_mean");
  for (const auto& [g, rep] : expected.at("groups").items()) check(rep, got.at("groups").at(g), g);
}

TEST(Report, JsonRoundTripAndTable) {
  std::vector<GoldPair> gold{gp("a", "x", GoldLabel::First), gp("b", "x", GoldLabel::Second)};
  Evaluator e = [](const std::string&, const std::string&, const std::string&) -> std::optional<Label> {
    return Label::First;
  };
  const auto r = swap_averaged_report(e, gold);
  const auto back = Json(r).get<MetricReport>();
  EXPECT_DOUBLE_EQ(back.macro_f1, r.macro_f1);
  EXPECT_EQ(back.forward, r.forward);
  const auto table = format_report(r, "demo");
  EXPECT_NE(table.find("demo"), std::string::npos);
  EXPECT_NE(table.find("Kappa"), std::string::npos);
}
