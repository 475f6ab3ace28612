#include "pairjudge/config.hpp"

#include <cstdlib>
#include <set>
#include <sstream>

#include "pairjudge/digest.hpp"
#include "pairjudge/error.hpp"
#include "pairjudge/jsonl.hpp"
#include "pairjudge/rng.hpp"
#include "toml.hpp"

namespace pairjudge {

namespace fs = std::filesystem;

std::string interpolate_env(const std::string& s) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s.compare(i, 2, "${") != 0) {
      out += s[i++];
      continue;
    }
    const auto close = s.find('}', i + 2);
    if (close == std::string::npos) throw Error(ErrorKind::InvalidConfig, "unterminated ${ in '" + s + "'");
    const auto body = s.substr(i + 2, close - i - 2);
    const auto sep = body.find(":-");
    const auto name = body.substr(0, sep);
    if (name.empty()) throw Error(ErrorKind::InvalidConfig, "empty variable name in '" + s + "'");
    if (const char* v = std::getenv(name.c_str()); v && *v) {
      out += v;
    } else if (sep != std::string::npos) {
      out += body.substr(sep + 2);
    } else {
      throw Error(ErrorKind::InvalidConfig, "environment variable " + name + " is not set");
    }
    i = close + 1;
  }
  return out;
}

namespace {

Json toml_to_json(const toml::node& n, const std::string& where) {
  if (const auto* t = n.as_table()) {
    Json o = Json::object();
    for (auto&& [k, v] : *t) {
      const std::string key(k.str());
      o[key] = toml_to_json(v, where.empty() ? key : where + "." + key);
    }
    return o;
  }
  if (const auto* a = n.as_array()) {
    Json arr = Json::array();
    for (const auto& v : *a) arr.push_back(toml_to_json(v, where));
    return arr;
  }
  if (const auto* s = n.as_string()) return interpolate_env(s->get());
  if (const auto* i = n.as_integer()) return i->get();
  if (const auto* f = n.as_floating_point()) return f->get();
  if (const auto* b = n.as_boolean()) return b->get();
  throw Error(ErrorKind::InvalidConfig, where + ": dates and times are not supported");
}

/// Reads keys out of one table and rejects whatever is left over.
class Section {
 public:
  Section(const Json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw Error(ErrorKind::InvalidConfig, where() + " must be a table");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    const auto& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::invalid_argument("expected a boolean");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("expected a string");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.get<std::int64_t>() < 0) throw std::invalid_argument("must be non-negative");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw std::invalid_argument("expected a number");
      }
      out = v.get<T>();
    } catch (const std::exception& e) {
      throw Error(ErrorKind::InvalidConfig, where() + "." + key + ": " + e.what());
    }
  }

  void get_path(const std::string& key, fs::path& out) {
    std::string s;
    get(key, s);
    if (j_.contains(key)) out = s;
  }

  template <typename Fn>
  void get_parsed(const std::string& key, Fn parse) {
    std::string s;
    get(key, s);
    if (!j_.contains(key)) return;
    try {
      parse(s);
    } catch (const Error& e) {
      throw Error(ErrorKind::InvalidConfig, where() + "." + key + ": " + e.what());
    }
  }

  Section sub(const std::string& key) {
    used_.insert(key);
    return Section(j_.at(key), name_.empty() ? key : name_ + "." + key);
  }

  const Json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [k, _] : j_.items()) {
      if (!used_.count(k)) throw Error(ErrorKind::InvalidConfig, "unknown key '" + k + "' in " + where());
    }
  }

 private:
  std::string where() const { return name_.empty() ? "top level" : "[" + name_ + "]"; }

  const Json& j_;
  std::string name_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(ErrorKind::InvalidConfig, msg);
}

}  // namespace

RunConfig RunConfig::defaults() {
  RunConfig c;
  c.gateway = gateway::GatewayConfig::from_env();
  c.base_dir = fs::current_path();
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorKind::FileMissing, path.string());
  auto base = fs::absolute(path).parent_path();
  return parse(jsonl::read_file(path), base);
}

RunConfig RunConfig::parse(const std::string& toml_text, const fs::path& base_dir) {
  Json doc;
  try {
    doc = toml_to_json(toml::parse(toml_text), "");
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "TOML syntax error at line " << e.source().begin.line << ": " << e.description();
    throw Error(ErrorKind::InvalidConfig, os.str());
  }

  RunConfig c = defaults();
  c.base_dir = base_dir;
  Section top(doc, "");
  top.get("seed", c.seed);
  top.get_path("out_dir", c.out_dir);
  top.get_path("templates_dir", c.templates_dir);

  if (top.has("gateway")) {
    auto s = top.sub("gateway");
    s.get("base_url", c.gateway.base_url);
    s.get("api_key", c.gateway.api_key);
    s.get_path("cache_dir", c.gateway.cache_dir);
    s.get("concurrency", c.gateway.concurrency);
    require(c.gateway.concurrency > 0, "[gateway].concurrency must be positive");
    s.finish();
  }

  if (top.has("models")) {
    auto s = top.sub("models");
    s.get("instruction", c.models.instruction);
    s.get("gate", c.models.gate);
    s.get("enhancer", c.models.enhancer);
    s.get("embed", c.models.embed);
    s.get("ppl", c.models.ppl);
    s.finish();
  }

  if (top.has("sources")) {
    auto all = top.sub("sources");
    for (const auto& [name, _] : doc.at("sources").items()) {
      auto s = all.sub(name);
      corpus::SourceConfig src;
      src.name = name;
      std::string path;
      s.get("path", path);
      require(!path.empty(), "[sources." + name + "].path is required");
      src.path = path;
      s.get_parsed("kind", [&](const std::string& v) { src.kind = parse_source_kind(v); });
      s.get("instruction_field", src.instruction_field);
      s.get("response_field", src.response_field);
      s.get("domain", src.domain);
      s.get("domain_field", src.domain_field);
      s.get("language", src.language);
      s.get("generate_instruction", src.generate_instruction);
      s.finish();
      require(!src.response_field.empty(), "[sources." + name + "].response_field must not be empty");
      c.sources.emplace(name, std::move(src));
    }
    all.finish();
  }

  if (top.has("generators")) {
    const auto& arr = top.raw("generators");
    require(arr.is_array(), "generators must be an array of tables ([[generators]])");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Section s(arr[i], "generators." + std::to_string(i));
      GeneratorSpec g;
      s.get("model_id", g.model_id);
      require(!g.model_id.empty(), "[[generators]] entry " + std::to_string(i) + " needs model_id");
      s.get("tier", g.tier);
      s.get_parsed("prompt_kind", [&](const std::string& v) {
        if (v == "CREATIVE") {
          g.prompt_kind = PromptKind::Creative;
        } else if (v == "ORDINARY") {
          g.prompt_kind = PromptKind::Ordinary;
        } else {
          throw Error(ErrorKind::InvalidArgument, "expected ORDINARY or CREATIVE");
        }
      });
      s.get("temperature", g.decoding.temperature);
      s.get("max_tokens", g.decoding.max_tokens);
      s.finish();
      c.generators.push_back(std::move(g));
    }
    validate_generator_specs(c.generators);
  }

  if (top.has("filters")) {
    auto s = top.sub("filters");
    auto& l = c.standardize.limits;
    s.get("instruction_min", l.instruction_min);
    s.get("instruction_max", l.instruction_max);
    s.get("response_min", l.response_min);
    s.get("response_max", l.response_max);
    s.get("repeat_ngram", l.repeat_ngram);
    s.get("repeat_count", l.repeat_count);
    s.finish();
    require(l.instruction_min <= l.instruction_max && l.response_min <= l.response_max,
            "[filters] minimum lengths must not exceed maximums");
    require(l.repeat_ngram >= 1 && l.repeat_count >= 2, "[filters] repeat_ngram >= 1 and repeat_count >= 2");
  }

  if (top.has("gate")) {
    auto s = top.sub("gate");
    s.get("threshold", c.standardize.gate_threshold);
    require(c.standardize.gate_threshold >= 1 && c.standardize.gate_threshold <= 6, "[gate].threshold must be 1..6");
    if (s.has("kinds")) {
      const auto& kinds = s.raw("kinds");
      require(kinds.is_array(), "[gate].kinds must be an array");
      c.standardize.gated_kinds.clear();
      for (const auto& k : kinds) {
        require(k.is_string(), "[gate].kinds entries must be strings");
        try {
          c.standardize.gated_kinds.insert(parse_source_kind(k.get<std::string>()));
        } catch (const Error& e) {
          throw Error(ErrorKind::InvalidConfig, std::string("[gate].kinds: ") + e.what());
        }
      }
    }
    s.get("temperature", c.standardize.generation_temperature);
    s.get("max_tokens", c.standardize.generation_max_tokens);
    s.finish();
  }

  if (top.has("augment")) {
    auto s = top.sub("augment");
    s.get("k", c.augment.k);
    s.get("enhancer_temperature", c.augment.enhancer_temperature);
    s.get("enhancer_max_tokens", c.augment.enhancer_max_tokens);
    s.finish();
    require(c.augment.k >= 1, "[augment].k must be at least 1");
  }

  if (top.has("pairs")) {
    auto s = top.sub("pairs");
    s.get("negative_rate", c.negatives.rate);
    s.get("negative_same_source", c.negatives.same_source);
    s.get_parsed("export_variant",
                 [&](const std::string& v) { c.export_variant = synthesis::parse_export_variant(v); });
    s.finish();
    require(c.negatives.rate >= 0.0 && c.negatives.rate <= 1.0, "[pairs].negative_rate must lie in [0, 1]");
  }

  if (top.has("judge")) {
    auto s = top.sub("judge");
    s.get("model", c.judge.model_id);
    s.get("template", c.judge.template_id);
    s.get("temperature", c.judge.temperature);
    s.get("max_tokens", c.judge.max_tokens);
    s.get("language", c.judge.language);
    s.get_parsed("parse_mode", [&](const std::string& v) {
      if (v == "STRICT_TAG") {
        c.judge.parse_mode = judge::ParseMode::StrictTag;
      } else if (v == "PATTERN_FALLBACK") {
        c.judge.parse_mode = judge::ParseMode::PatternFallback;
      } else {
        throw Error(ErrorKind::InvalidArgument, "expected STRICT_TAG or PATTERN_FALLBACK");
      }
    });
    s.finish();
    require(c.judge.temperature == 0.0, "[judge].temperature must be 0");
  }

  if (top.has("gold")) {
    auto s = top.sub("gold");
    s.get("distinct", c.gold.distinct);
    s.get("tie", c.gold.tie);
    s.get("epsilon", c.gold.epsilon);
    s.finish();
    require(c.gold.tie >= 0.0 && c.gold.tie <= c.gold.distinct, "[gold] needs 0 <= tie <= distinct");
  }

  if (top.has("eval")) {
    auto s = top.sub("eval");
    s.get_parsed("f1", [&](const std::string& v) {
      if (v == "macro") {
        c.f1_average = metaeval::F1Average::Macro;
      } else if (v == "weighted") {
        c.f1_average = metaeval::F1Average::Weighted;
      } else {
        throw Error(ErrorKind::InvalidArgument, "expected macro or weighted");
      }
    });
    s.get_parsed("tie_rule", [&](const std::string& v) { c.tie_rule = rankdpo::parse_tie_rule(v); });
    s.finish();
  }

  if (top.has("baseline")) {
    auto s = top.sub("baseline");
    auto& b = c.baseline;
    s.get_parsed("metric", [&](const std::string& v) { b.rule.metric = baselines::parse_metric(v); });
    s.get("tie_band", b.rule.tie_band);
    s.get_path("corpus", b.corpus);
    s.get_path("index", b.index);
    s.get("L", b.L);
    s.get("n_min", b.n_min);
    s.get("n_max", b.n_max);
    s.get_parsed("unit", [&](const std::string& v) {
      if (v == "auto") {
        b.unit.reset();
      } else {
        b.unit = text::parse_unit(v);
      }
    });
    s.get_parsed("dsi_granularity",
                 [&](const std::string& v) { b.dsi_granularity = baselines::parse_granularity(v); });
    s.finish();
    b.rule.validate();
    require(b.n_min >= 2 && b.n_min <= b.n_max, "[baseline] needs 2 <= n_min <= n_max");
    require(b.L >= b.n_min && b.L <= b.n_max, "[baseline].L must lie in [n_min, n_max]");
  }

  if (top.has("dpo")) {
    auto s = top.sub("dpo");
    s.get_parsed("variant", [&](const std::string& v) { c.dpo_variant = rankdpo::parse_variant(v); });
    s.finish();
  }

  if (top.has("anno")) {
    auto s = top.sub("anno");
    s.get("host", c.anno.server.host);
    s.get("port", c.anno.server.port);
    s.get("cors_origin", c.anno.server.cors_origin);
    s.get("admin_token", c.anno.server.admin_token);
    s.get_path("store_dir", c.anno.store_dir);
    s.get("snapshot_every", c.anno.snapshot_every);
    s.finish();
    require(c.anno.server.port > 0 && c.anno.server.port < 65536, "[anno].port out of range");
  }

  top.finish();

  // resolve relative paths against the config directory
  for (auto& [_, src] : c.sources) src.path = c.resolve(src.path);
  c.out_dir = c.resolve(c.out_dir);
  if (!c.templates_dir.empty()) c.templates_dir = c.resolve(c.templates_dir);
  if (!c.gateway.cache_dir.empty()) c.gateway.cache_dir = c.resolve(c.gateway.cache_dir);
  if (!c.baseline.corpus.empty()) c.baseline.corpus = c.resolve(c.baseline.corpus);
  if (!c.baseline.index.empty()) c.baseline.index = c.resolve(c.baseline.index);
  if (!c.anno.store_dir.empty()) c.anno.store_dir = c.resolve(c.anno.store_dir);

  c.standardize.instruction_model = c.models.instruction;
  c.standardize.gate_model = c.models.gate;
  c.standardize.concurrency = c.gateway.concurrency;
  c.augment.enhancer_model = c.models.enhancer;
  return c;
}

fs::path RunConfig::resolve(const fs::path& p) const {
  if (p.empty() || p.is_absolute()) return p;
  return (base_dir / p).lexically_normal();
}

std::uint64_t RunConfig::stage_seed(std::string_view stage) const { return derive_seed(seed, stage); }

Json RunConfig::to_json() const {
  Json sources = Json::object();
  for (const auto& [name, s] : this->sources) {
    sources[name] = Json{{"path", s.path.string()},
                         {"kind", source_kind_name(s.kind)},
                         {"instruction_field", s.instruction_field},
                         {"response_field", s.response_field},
                         {"domain", s.domain},
                         {"domain_field", s.domain_field},
                         {"language", s.language},
                         {"generate_instruction", s.generate_instruction}};
  }
  Json gated = Json::array();
  for (auto k : standardize.gated_kinds) gated.push_back(source_kind_name(k));
  const auto& l = standardize.limits;
  return Json{
      {"seed", seed},
      {"out_dir", out_dir.string()},
      {"templates_dir", templates_dir.string()},
      {"gateway",
       {{"base_url", gateway.base_url},
        {"api_key", gateway.api_key.empty() ? "" : "<redacted>"},
        {"cache_dir", gateway.cache_dir.string()},
        {"concurrency", gateway.concurrency}}},
      {"models",
       {{"instruction", models.instruction},
        {"gate", models.gate},
        {"enhancer", models.enhancer},
        {"embed", models.embed},
        {"ppl", models.ppl}}},
      {"sources", sources},
      {"generators", generators},
      {"filters",
       {{"instruction_min", l.instruction_min},
        {"instruction_max", l.instruction_max},
        {"response_min", l.response_min},
        {"response_max", l.response_max},
        {"repeat_ngram", l.repeat_ngram},
        {"repeat_count", l.repeat_count}}},
      {"gate",
       {{"threshold", standardize.gate_threshold},
        {"kinds", gated},
        {"temperature", standardize.generation_temperature},
        {"max_tokens", standardize.generation_max_tokens}}},
      {"augment",
       {{"k", augment.k},
        {"enhancer_temperature", augment.enhancer_temperature},
        {"enhancer_max_tokens", augment.enhancer_max_tokens}}},
      {"pairs",
       {{"negative_rate", negatives.rate},
        {"negative_same_source", negatives.same_source},
        {"export_variant", synthesis::export_variant_name(export_variant)}}},
      {"judge",
       {{"model", judge.model_id},
        {"template", judge.template_id},
        {"temperature", judge.temperature},
        {"max_tokens", judge.max_tokens},
        {"language", judge.language},
        {"parse_mode", judge.parse_mode == judge::ParseMode::StrictTag ? "STRICT_TAG" : "PATTERN_FALLBACK"}}},
      {"gold", {{"distinct", gold.distinct}, {"tie", gold.tie}, {"epsilon", gold.epsilon}}},
      {"eval",
       {{"f1", f1_average == metaeval::F1Average::Macro ? "macro" : "weighted"},
        {"tie_rule", tie_rule == rankdpo::TieRule::Half ? "half" : "excluded"}}},
      {"baseline",
       {{"metric", baselines::metric_name(baseline.rule.metric)},
        {"tie_band", baseline.rule.tie_band},
        {"corpus", baseline.corpus.string()},
        {"index", baseline.index.string()},
        {"L", baseline.L},
        {"n_min", baseline.n_min},
        {"n_max", baseline.n_max},
        {"unit", baseline.unit ? std::string(text::unit_name(*baseline.unit)) : "auto"},
        {"dsi_granularity", baselines::granularity_name(baseline.dsi_granularity)}}},
      {"dpo", {{"variant", dpo_variant.name()}}},
      {"anno",
       {{"host", anno.server.host},
        {"port", anno.server.port},
        {"cors_origin", anno.server.cors_origin},
        {"admin_token", anno.server.admin_token.empty() ? "" : "<redacted>"},
        {"store_dir", anno.store_dir.string()},
        {"snapshot_every", anno.snapshot_every}}}};
}

std::string RunConfig::digest() const { return sha256_hex(jsonl::dump(to_json())); }

}  // namespace pairjudge
