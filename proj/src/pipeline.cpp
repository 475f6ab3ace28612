#include "pairjudge/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "pairjudge/baselines.hpp"
#include "pairjudge/corpus.hpp"
#include "pairjudge/digest.hpp"
#include "pairjudge/error.hpp"
#include "pairjudge/jsonl.hpp"
#include "pairjudge/judge.hpp"
#include "pairjudge/parallel.hpp"
#include "pairjudge/rankdpo.hpp"
#include "pairjudge/synthesis.hpp"

namespace fs = std::filesystem;

namespace pairjudge::pipeline {

Context::Context(RunConfig cfg, std::optional<fs::path> mock_script) : cfg_(std::move(cfg)), mock_(std::move(mock_script)) {
  if (!cfg_.templates_dir.empty()) templates_.load_dir(cfg_.templates_dir);
  fs::create_directories(cfg_.out_dir);
}

std::shared_ptr<gateway::Gateway> Context::gateway() {
  if (!gw_) {
    // A mock run is hermetic: no cache writes, nothing but the script.
    gw_ = mock_ ? gateway::Gateway::mock(*mock_) : gateway::Gateway::from_config(cfg_.gateway);
  }
  return gw_;
}

fs::path Context::out(const std::string& name) const { return cfg_.out_dir / name; }

std::string Context::display(const fs::path& p) const {
  const auto rel = p.lexically_proximate(cfg_.out_dir);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return p.generic_string();
}

void Context::input(const fs::path& p) { inputs_[display(p)] = jsonl::file_digest(p); }
void Context::output(const fs::path& p) { outputs_[display(p)] = jsonl::file_digest(p); }

void Context::finish_stage(const std::string& stage, const Json& summary) {
  const auto path = out(files::kManifest);
  Json manifest = Json::object();
  if (fs::exists(path)) {
    try {
      manifest = Json::parse(jsonl::read_file(path));
    } catch (const Json::exception&) {
      manifest = Json::object();  // a damaged manifest is rebuilt, not trusted
    }
  }
  Json entry{{"config_digest", cfg_.digest()},
             {"template_version", templates_.version()},
             {"tool_version", kToolVersion},
             {"seed", cfg_.seed},
             {"stage_seed", cfg_.stage_seed(stage)},
             {"inputs", inputs_},
             {"outputs", outputs_},
             {"summary", summary},
             {"gateway", mock_ ? "mock" : gw_ ? "live" : "none"}};
  if (mock_) entry["mock_script_digest"] = jsonl::file_digest(*mock_);
  if (gw_) entry["gateway_calls"] = gw_->call_count();
  manifest["config"] = cfg_.to_json();
  manifest["stages"][stage] = std::move(entry);
  jsonl::write_file(path, manifest.dump(2) + "\n");
  inputs_.clear();
  outputs_.clear();
}

namespace {

void require_file(const fs::path& p, const std::string& hint) {
  if (!fs::exists(p)) throw Error(ErrorKind::FileMissing, p.string() + " (run `" + hint + "` first)");
}

template <typename T>
void write_rows(Context& ctx, const fs::path& p, const std::vector<T>& rows) {
  jsonl::write(p, jsonl::to_values(rows));
  ctx.output(p);
}

template <typename T>
std::vector<T> read_rows(Context& ctx, const fs::path& p, const std::string& stage_hint) {
  require_file(p, stage_hint);
  ctx.input(p);
  std::vector<T> out;
  std::size_t line = 0;
  for (const auto& v : jsonl::read_strict(p)) {
    ++line;
    try {
      out.push_back(v.template get<T>());
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::MalformedLine, p.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

std::string detail_message(const Error& e) {
  const std::string w = e.what();
  const auto name = std::string(error_kind_name(e.kind())) + ": ";
  return w.rfind(name, 0) == 0 ? w.substr(name.size()) : w;
}

}  // namespace

// ---------------------------------------------------------------------------

Json run_ingest(Context& ctx) {
  const auto& cfg = ctx.config();
  if (cfg.sources.empty()) throw Error(ErrorKind::InvalidConfig, "no [sources.*] configured");
  std::vector<corpus::RawRecord> records;
  Json bad = Json::array();
  Json per_source = Json::object();
  for (const auto& [name, src] : cfg.sources) {
    auto res = corpus::ingest(src.path, name, src.kind);
    ctx.input(src.path);
    for (const auto& b : res.bad_lines) bad.push_back({{"source", name}, {"line", b.line_number}, {"message", b.message}});
    per_source[name] = {{"records", res.records.size()}, {"bad_lines", res.bad_lines.size()}};
    for (auto& r : res.records) records.push_back(std::move(r));
  }
  write_rows(ctx, ctx.out(files::kRaw), records);
  std::vector<Json> bad_rows(bad.begin(), bad.end());
  jsonl::write(ctx.out(files::kIngestBadLines), bad_rows);
  ctx.output(ctx.out(files::kIngestBadLines));
  Json summary{{"records", records.size()}, {"bad_lines", bad.size()}, {"sources", per_source}};
  ctx.finish_stage("ingest", summary);
  return summary;
}

Json run_standardize(Context& ctx) {
  const auto& cfg = ctx.config();
  auto records = read_rows<corpus::RawRecord>(ctx, ctx.out(files::kRaw), "ingest");
  auto options = cfg.standardize;
  options.seed = cfg.stage_seed("standardize");
  auto res = corpus::standardize(records, cfg.sources, *ctx.gateway(), ctx.templates(), options);

  write_rows(ctx, ctx.out(files::kSamples), res.samples);
  write_rows(ctx, ctx.out(files::kStandardizeReport), res.report);

  std::map<std::string, std::size_t> by_status;
  for (const auto& row : res.report) {
    Json j = row;
    by_status[j.at("verdict").get<std::string>()]++;
  }
  Json summary{{"records", records.size()}, {"samples", res.samples.size()}, {"verdicts", by_status}};
  ctx.finish_stage("standardize", summary);
  return summary;
}

Json run_augment(Context& ctx) {
  const auto& cfg = ctx.config();
  validate_generator_specs(cfg.generators);
  if (cfg.generators.empty()) throw Error(ErrorKind::InvalidConfig, "no [[generators]] configured");
  auto samples = read_rows<Sample>(ctx, ctx.out(files::kSamples), "standardize");
  auto options = cfg.augment;
  options.seed = cfg.stage_seed("augment");
  auto gw = ctx.gateway();

  struct Outcome {
    std::optional<synthesis::ResponseSet> set;
    Json report;
  };
  auto outcomes = parallel_map(
      samples,
      [&](const Sample& s) {
        Outcome o;
        o.report = {{"sample_id", s.id}};
        try {
          auto r = synthesis::augment(s, cfg.generators, *gw, ctx.templates(), options);
          o.report["status"] = "ok";
          o.report["candidates"] = r.set.candidates.size();
          o.report["warnings"] = r.warnings;
          o.set = std::move(r.set);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::InsufficientCandidates && e.kind() != ErrorKind::EmptyGeneration) throw;
          o.report["status"] = "skipped";
          o.report["error"] = error_kind_name(e.kind());
          o.report["detail"] = detail_message(e);
        }
        return o;
      },
      cfg.gateway.concurrency);

  std::vector<synthesis::ResponseSet> sets;
  std::vector<Json> report;
  std::size_t candidates = 0;
  for (auto& o : outcomes) {
    report.push_back(std::move(o.report));
    if (o.set) {
      candidates += o.set->candidates.size();
      sets.push_back(std::move(*o.set));
    }
  }
  write_rows(ctx, ctx.out(files::kResponseSets), sets);
  jsonl::write(ctx.out(files::kAugmentReport), report);
  ctx.output(ctx.out(files::kAugmentReport));
  Json summary{{"samples", samples.size()},
               {"response_sets", sets.size()},
               {"skipped", samples.size() - sets.size()},
               {"candidates", candidates}};
  ctx.finish_stage("augment", summary);
  return summary;
}

Json run_label(Context& ctx, std::optional<synthesis::ExportVariant> variant) {
  const auto& cfg = ctx.config();
  const auto v = variant.value_or(cfg.export_variant);
  auto sets = read_rows<synthesis::ResponseSet>(ctx, ctx.out(files::kResponseSets), "augment");
  auto samples = read_rows<Sample>(ctx, ctx.out(files::kSamples), "standardize");

  const auto pair_seed = cfg.stage_seed("label");
  std::vector<PairRecord> pairs;
  std::map<std::string, std::string> language;  // sample id -> template language
  for (const auto& rs : sets) {
    language[rs.sample_id] = template_language(rs.language);
    for (auto& p : synthesis::build_pairs(rs, pair_seed)) pairs.push_back(std::move(p));
  }

  std::vector<std::string> warnings;
  std::vector<Sample> pool;
  for (const auto& s : samples) {
    if (language.count(s.id)) pool.push_back(s);
  }
  if (cfg.negatives.rate > 0.0) {
    if (pool.size() < 2) {
      warnings.push_back("negative sampling skipped: fewer than 2 samples");
    } else {
      for (auto& p : synthesis::sample_negatives(pool, cfg.stage_seed("negatives"), cfg.negatives)) {
        pairs.push_back(std::move(p));
      }
    }
  }
  write_rows(ctx, ctx.out(files::kPairs), pairs);

  std::vector<synthesis::TrainingTriplet> triplets;
  triplets.reserve(pairs.size());
  for (const auto& p : pairs) {
    auto it = p.metadata.find("sample_id");
    const auto lang = (it != p.metadata.end() && language.count(it->second)) ? language.at(it->second) : "en";
    triplets.push_back(synthesis::make_triplet(p, ctx.templates().get(cfg.judge.template_id, lang)));
  }
  synthesis::ExportCounts counts;
  auto exported = synthesis::export_training(triplets, v, &counts);
  write_rows(ctx, ctx.out(files::kTraining), exported);

  Json summary{{"variant", synthesis::export_variant_name(v)},
               {"pairs", pairs.size()},
               {"counts", counts},
               {"warnings", warnings}};
  jsonl::write_file(ctx.out(files::kLabelCounts), summary.dump(2) + "\n");
  ctx.output(ctx.out(files::kLabelCounts));
  ctx.finish_stage("label", summary);
  return summary;
}

std::vector<metaeval::GoldPair> read_gold(const fs::path& path, const metaeval::GoldThresholds& th) {
  std::vector<metaeval::GoldPair> out;
  std::size_t line = 0;
  for (auto v : jsonl::read_strict(path)) {
    ++line;
    try {
      if (!v.contains("label")) {
        if (!v.contains("mean1") || !v.contains("mean2")) {
          throw Error(ErrorKind::MalformedLine,
                      path.string() + ":" + std::to_string(line) + ": needs label or mean1/mean2");
        }
        v["label"] = metaeval::gold_label_name(
            metaeval::gold_label(v.at("mean1").get<double>(), v.at("mean2").get<double>(), th));
      }
      out.push_back(v.get<metaeval::GoldPair>());
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::MalformedLine, path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

Json run_judge(Context& ctx, const fs::path& gold_path) {
  const auto& cfg = ctx.config();
  cfg.judge.validate();
  require_file(gold_path, "anno-serve export");
  auto gold = read_gold(gold_path, cfg.gold);
  ctx.input(gold_path);

  std::vector<metaeval::GoldPair> todo;
  for (const auto& g : gold) {
    if (g.label != metaeval::GoldLabel::Excluded) todo.push_back(g);
  }
  judge::LlmJudge j(cfg.judge, ctx.gateway(), ctx.templates());
  auto judged = parallel_map(
      todo,
      [&](const metaeval::GoldPair& g) {
        return judge::dump_rows(g.pair_id, judge::judge_with_swap(j, g.instruction, g.r1, g.r2));
      },
      cfg.gateway.concurrency);

  std::vector<judge::DumpRow> rows;
  std::size_t failed = 0;
  for (auto& pr : judged) {
    for (auto& r : pr) {
      if (!r.verdict) ++failed;
      rows.push_back(std::move(r));
    }
  }
  write_rows(ctx, ctx.out(files::kVerdicts), rows);
  Json summary{{"judge", j.id()}, {"pairs", todo.size()}, {"rows", rows.size()}, {"unparseable_rows", failed}};
  ctx.finish_stage("judge", summary);
  return summary;
}

metaeval::EvalResult run_eval(Context& ctx, const fs::path& verdicts, const fs::path& gold_path) {
  const auto& cfg = ctx.config();
  auto rows = read_rows<judge::DumpRow>(ctx, verdicts, "judge");
  require_file(gold_path, "anno-serve export");
  auto gold = read_gold(gold_path, cfg.gold);
  ctx.input(gold_path);
  auto result = metaeval::evaluate_dump(rows, gold, cfg.f1_average);
  const auto out = ctx.out(files::kMetricReport);
  jsonl::write_file(out, Json(result).dump(2) + "\n");
  ctx.output(out);
  ctx.finish_stage("eval", Json(result.overall));
  return result;
}

Json run_win_rate(Context& ctx, const fs::path& candidate, const fs::path& reference) {
  const auto& cfg = ctx.config();
  cfg.judge.validate();
  auto load = [&](const fs::path& p) {
    require_file(p, "generation");
    ctx.input(p);
    std::map<std::string, std::string> m;
    std::size_t line = 0;
    for (const auto& v : jsonl::read_strict(p)) {
      ++line;
      if (!v.is_object() || !v.contains("instruction") || !v.contains("response")) {
        throw Error(ErrorKind::MalformedLine, p.string() + ":" + std::to_string(line) + ": needs instruction and response");
      }
      const auto key = v.at("instruction").get<std::string>();
      if (!m.emplace(key, v.at("response").get<std::string>()).second) {
        throw Error(ErrorKind::InvalidArgument, p.string() + ":" + std::to_string(line) + ": duplicate instruction");
      }
    }
    return m;
  };
  auto cand = load(candidate);
  auto ref = load(reference);
  judge::LlmJudge j(cfg.judge, ctx.gateway(), ctx.templates());
  auto report = rankdpo::win_rate(cand, ref, j, cfg.tie_rule, cfg.gateway.concurrency);
  Json summary = report;
  jsonl::write_file(ctx.out(files::kWinRate), summary.dump(2) + "\n");
  ctx.output(ctx.out(files::kWinRate));
  ctx.finish_stage("win-rate", summary);
  return summary;
}

std::vector<std::string> read_corpus(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorKind::FileMissing, "corpus " + path.string());
  std::vector<std::string> docs;
  if (path.extension() == ".jsonl") {
    for (const auto& v : jsonl::read_strict(path)) {
      if (!v.is_object() || !v.contains("text")) throw Error(ErrorKind::MalformedLine, path.string() + ": rows need a text field");
      docs.push_back(v.at("text").get<std::string>());
    }
    return docs;
  }
  std::ifstream in(path, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!text::trim(line).empty()) docs.push_back(line);
  }
  return docs;
}

namespace {

text::Unit corpus_unit(const std::vector<std::string>& docs) {
  std::string joined;
  for (const auto& d : docs) {
    joined += d;
    joined += '\n';
    if (joined.size() > (1u << 20)) break;
  }
  return text::detect_unit(joined);
}

baselines::NGramIndex load_or_build_index(Context& ctx) {
  const auto& b = ctx.config().baseline;
  const auto idx_path = b.index.empty() ? ctx.out("ngram.idx") : b.index;
  if (fs::exists(idx_path)) {
    auto idx = baselines::NGramIndex::load(idx_path);
    const bool unit_ok = !b.unit || *b.unit == idx.unit();
    if (idx.n_min() == b.n_min && idx.n_max() == b.n_max && unit_ok) {
      ctx.input(idx_path);
      return idx;
    }
    std::cerr << "warning: index " << idx_path << " was built with other settings; rebuilding\n";
  }
  if (b.corpus.empty()) throw Error(ErrorKind::InvalidConfig, "baseline.corpus is required for CINDEX");
  auto docs = read_corpus(b.corpus);
  ctx.input(b.corpus);
  const auto unit = b.unit.value_or(corpus_unit(docs));
  auto idx = baselines::build_index(docs, b.n_min, b.n_max, unit);
  if (idx_path.has_parent_path()) fs::create_directories(idx_path.parent_path());
  idx.save(idx_path);
  ctx.output(idx_path);
  return idx;
}

}  // namespace

Json run_baseline(Context& ctx, const fs::path& gold_path, std::optional<baselines::Metric> metric) {
  const auto& cfg = ctx.config();
  auto rule = cfg.baseline.rule;
  if (metric) rule.metric = *metric;
  rule.validate();
  require_file(gold_path, "anno-serve export");
  auto gold = read_gold(gold_path, cfg.gold);
  ctx.input(gold_path);

  baselines::ScalarJudge::Scorer scorer;
  std::optional<baselines::NGramIndex> index;
  switch (rule.metric) {
    case baselines::Metric::Ppl: {
      if (cfg.models.ppl.empty()) throw Error(ErrorKind::InvalidConfig, "models.ppl is required for PPL");
      auto gw = ctx.gateway();
      scorer = [gw, model = cfg.models.ppl](const std::string& t) { return baselines::ppl(t, *gw, model); };
      break;
    }
    case baselines::Metric::Dsi: {
      if (cfg.models.embed.empty()) throw Error(ErrorKind::InvalidConfig, "models.embed is required for DSI");
      auto gw = ctx.gateway();
      scorer = [gw, model = cfg.models.embed, g = cfg.baseline.dsi_granularity](const std::string& t) {
        return baselines::dsi(t, *gw, model, g);
      };
      break;
    }
    case baselines::Metric::CIndex: {
      index = load_or_build_index(ctx);
      scorer = [&idx = *index, L = cfg.baseline.L](const std::string& t) {
        return baselines::creativity_index(t, idx, L);
      };
      break;
    }
  }

  baselines::ScalarJudge j(rule, scorer);
  std::vector<judge::DumpRow> rows;
  for (const auto& g : gold) {
    if (g.label == metaeval::GoldLabel::Excluded) continue;
    for (auto& r : judge::dump_rows(g.pair_id, judge::judge_with_swap(j, g.instruction, g.r1, g.r2))) {
      rows.push_back(std::move(r));
    }
  }
  const auto name = std::string(baselines::metric_name(rule.metric));
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  write_rows(ctx, ctx.out("verdicts." + lower + ".jsonl"), rows);

  auto result = metaeval::evaluate_dump(rows, gold, cfg.f1_average);
  const auto report_path = ctx.out("metric_report." + lower + ".json");
  jsonl::write_file(report_path, Json(result).dump(2) + "\n");
  ctx.output(report_path);
  Json summary{{"metric", name}, {"tie_band", rule.tie_band}, {"rows", rows.size()}, {"report", result.overall}};
  ctx.finish_stage("baseline." + lower, summary);
  return summary;
}

Json run_tournament(Context& ctx) {
  const auto& cfg = ctx.config();
  cfg.judge.validate();
  auto sets = read_rows<synthesis::ResponseSet>(ctx, ctx.out(files::kResponseSets), "augment");
  judge::LlmJudge j(cfg.judge, ctx.gateway(), ctx.templates());
  std::vector<rankdpo::TournamentResult> results;
  std::size_t decisive = 0, ties = 0, inconsistent = 0;
  for (const auto& rs : sets) {
    auto t = rankdpo::run_tournament(rs, j, cfg.gateway.concurrency);
    decisive += t.decisive;
    ties += t.ties;
    for (const auto& m : t.matches) inconsistent += m.inconsistent ? 1 : 0;
    results.push_back(std::move(t));
  }
  write_rows(ctx, ctx.out(files::kTournaments), results);
  Json summary{{"judge", j.id()},
               {"tournaments", results.size()},
               {"decisive", decisive},
               {"ties", ties},
               {"inconsistent", inconsistent}};
  ctx.finish_stage("tournament", summary);
  return summary;
}

Json run_dpo_export(Context& ctx, std::optional<rankdpo::VariantSpec> variant) {
  const auto& cfg = ctx.config();
  const auto v = variant.value_or(cfg.dpo_variant);
  auto sets = read_rows<synthesis::ResponseSet>(ctx, ctx.out(files::kResponseSets), "augment");

  std::map<std::string, rankdpo::TournamentResult> tournaments;
  const auto tpath = ctx.out(files::kTournaments);
  const bool ranked = v.variant != rankdpo::DpoVariant::Plain && v.variant != rankdpo::DpoVariant::Negative;
  if (ranked) {
    for (auto& t : read_rows<rankdpo::TournamentResult>(ctx, tpath, "tournament")) {
      tournaments.emplace(t.sample_id, std::move(t));
    }
  }
  auto dpo = rankdpo::build_dpo_dataset(sets, tournaments, v, cfg.stage_seed("dpo-export"));
  write_rows(ctx, ctx.out(files::kDpo), dpo.pairs);
  auto sft = rankdpo::export_sft(sets);
  write_rows(ctx, ctx.out(files::kSft), sft.records);

  std::map<std::string, std::size_t> difficulty;
  for (const auto& p : dpo.pairs) difficulty[std::string(rankdpo::reject_difficulty_name(p.reject_difficulty))]++;
  auto warnings = dpo.warnings;
  warnings.insert(warnings.end(), sft.warnings.begin(), sft.warnings.end());
  Json summary{{"variant", v.name()},
               {"dpo_pairs", dpo.pairs.size()},
               {"sft_records", sft.records.size()},
               {"reject_difficulty", difficulty},
               {"warnings", warnings}};
  ctx.finish_stage("dpo-export", summary);
  return summary;
}

Json run_report(Context& ctx) {
  Json summary = Json::object();
  const auto manifest = ctx.out(files::kManifest);
  if (fs::exists(manifest)) {
    const auto m = Json::parse(jsonl::read_file(manifest));
    if (m.contains("stages")) {
      for (const auto& [stage, entry] : m.at("stages").items()) summary["stages"][stage] = entry.value("summary", Json::object());
    }
  }
  for (const auto* name : {files::kRaw, files::kSamples, files::kResponseSets, files::kPairs, files::kTraining,
                           files::kVerdicts, files::kTournaments, files::kDpo, files::kSft}) {
    const auto p = ctx.out(name);
    if (!fs::exists(p)) continue;
    const auto rows = jsonl::read(p);
    summary["files"][name] = {{"rows", rows.values.size()}, {"digest", jsonl::file_digest(p)}};
  }
  const auto mr = ctx.out(files::kMetricReport);
  if (fs::exists(mr)) summary["metric_report"] = Json::parse(jsonl::read_file(mr)).at("overall");
  jsonl::write_file(ctx.out(files::kReport), summary.dump(2) + "\n");
  ctx.output(ctx.out(files::kReport));
  ctx.finish_stage("report", Json{{"files", summary.value("files", Json::object()).size()}});
  return summary;
}

}  // namespace pairjudge::pipeline
