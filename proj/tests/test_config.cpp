#include <gtest/gtest.h>

#include <cstdlib>

#include "pairjudge/config.hpp"

using namespace pairjudge;

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

const std::filesystem::path kBase = "/tmp/cfg";

}  // namespace

TEST(Interpolate, VariablesAndDefaults) {
  ::setenv("PJ_TEST_SET", "value", 1);
  ::unsetenv("PJ_TEST_UNSET");
  EXPECT_EQ(interpolate_env("a-${PJ_TEST_SET}-b"), "a-value-b");
  EXPECT_EQ(interpolate_env("${PJ_TEST_UNSET:-fallback}"), "fallback");
  EXPECT_EQ(interpolate_env("${PJ_TEST_SET:-fallback}"), "value");
  EXPECT_EQ(interpolate_env("no vars $ here"), "no vars $ here");
  EXPECT_EQ(kind_of([] { interpolate_env("${PJ_TEST_UNSET}"); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([] { interpolate_env("${PJ_TEST_SET"); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([] { interpolate_env("${}"); }), ErrorKind::InvalidConfig);
}

TEST(Parse, PipelineFixtureLoads) {
  const auto c = RunConfig::load(std::filesystem::path(PAIRJUDGE_FIXTURES) / "pipeline" / "run.toml");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.sources.size(), 3u);
  EXPECT_EQ(c.generators.size(), 4u);
  EXPECT_EQ(c.augment.k, 5u);
  EXPECT_EQ(c.standardize.gate_threshold, 4);
  EXPECT_TRUE(c.out_dir.is_absolute());
  EXPECT_TRUE(c.sources.at("poems").path.is_absolute());
  EXPECT_EQ(c.sources.at("poems").path.filename(), "poems.jsonl");
}

TEST(Parse, RejectsUnknownKeysAndBadValues) {
  EXPECT_EQ(kind_of([] { RunConfig::parse("sed = 1\n", kBase); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([] { RunConfig::parse("[gateway]\nconcurency = 2\n", kBase); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([] { RunConfig::parse("[gateway]\nconcurrency = 0\n", kBase); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([] { RunConfig::parse("[gate]\nthreshold = 9\n", kBase); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([] { RunConfig::parse("seed = \"x\"\n", kBase); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([] { RunConfig::parse("seed = = 3\n", kBase); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([] { RunConfig::parse("[sources.s]\nkind = \"A_EXISTING_CREATIVE\"\n", kBase); }),
            ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([] { RunConfig::load("/nonexistent/run.toml"); }), ErrorKind::FileMissing);
}

TEST(Parse, EnvironmentInterpolationInValues) {
  ::setenv("PJ_TEST_URL", "http://example.invalid/v1", 1);
  ::unsetenv("PJ_TEST_MISSING");
  const auto c = RunConfig::parse("[gateway]\nbase_url = \"${PJ_TEST_URL}\"\n", kBase);
  EXPECT_EQ(c.gateway.base_url, "http://example.invalid/v1");
  EXPECT_EQ(kind_of([] { RunConfig::parse("[gateway]\nbase_url = \"${PJ_TEST_MISSING}\"\n", kBase); }),
            ErrorKind::InvalidConfig);
}

TEST(Manifest, DigestIsStableAndSecretsAreRedacted) {
  const std::string text = "seed = 7\n[gateway]\napi_key = \"sk-secret\"\n";
  const auto a = RunConfig::parse(text, kBase);
  const auto b = RunConfig::parse(text, kBase);
  EXPECT_EQ(a.digest(), b.digest());
  EXPECT_EQ(a.digest().size(), 64u);
  EXPECT_EQ(a.to_json().dump().find("sk-secret"), std::string::npos);
  EXPECT_NE(a.digest(), RunConfig::parse("seed = 8\n", kBase).digest());
  EXPECT_NE(a.stage_seed("synthesis"), a.stage_seed("rankdpo"));
  EXPECT_EQ(a.stage_seed("synthesis"), b.stage_seed("synthesis"));
}
