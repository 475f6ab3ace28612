// pairjudge: command-line driver for every pipeline stage.
//
//   pairjudge --config run.toml [--mock script.jsonl] <stage> [stage flags]
//
// Exit codes: 0 success, 1 validation error, 2 runtime error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pairjudge/annoservice.hpp"
#include "pairjudge/config.hpp"
#include "pairjudge/error.hpp"
#include "pairjudge/jsonl.hpp"
#include "pairjudge/pipeline.hpp"

namespace fs = std::filesystem;
using namespace pairjudge;

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig:
    case ErrorKind::InvalidArgument:
    case ErrorKind::FileMissing:
    case ErrorKind::MalformedLine:
    case ErrorKind::KeyMismatch:
    case ErrorKind::LengthMismatch:
    case ErrorKind::DuplicateItemIds:
    case ErrorKind::TooFewRaters:
    case ErrorKind::MissingTournament:
    case ErrorKind::IndexFormat:
      return 1;
    default:
      return 2;
  }
}

struct Globals {
  std::string config;
  std::string mock;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string cache_dir;
};

RunConfig load_config(const Globals& g) {
  RunConfig cfg = g.config.empty() ? RunConfig::defaults() : RunConfig::load(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (!g.out_dir.empty()) cfg.out_dir = fs::absolute(g.out_dir).lexically_normal();
  if (!g.cache_dir.empty()) cfg.gateway.cache_dir = fs::absolute(g.cache_dir).lexically_normal();
  return cfg;
}

void print(const Json& j) { std::cout << j.dump(2) << "\n"; }

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pairjudge: pairwise creativity evaluation pipeline"};
  app.set_version_flag("--version", std::string(pipeline::kToolVersion));
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "Run configuration (TOML)");
  app.add_option("--mock", g.mock, "Mock gateway script (JSONL); no network access");
  app.add_option("--seed", g.seed, "Override the root seed");
  app.add_option("--out-dir", g.out_dir, "Override the output directory");
  app.add_option("--cache-dir", g.cache_dir, "Override the gateway cache directory");

  auto* ingest = app.add_subcommand("ingest", "Read configured sources into raw.jsonl");
  auto* standardize = app.add_subcommand("standardize", "Instruction generation, filters and creativity gate");
  auto* augment = app.add_subcommand("augment", "Generate candidate responses per sample");

  auto* label = app.add_subcommand("label", "Build labelled pairs and the training export");
  std::string export_variant;
  label->add_option("--variant", export_variant, "FULL, NO_NEG, NO_SYN or ONLY_SYN");

  auto* judge_cmd = app.add_subcommand("judge", "Judge gold pairs in both orders and dump verdicts");
  std::string judge_gold;
  judge_cmd->add_option("--gold", judge_gold, "Gold pairs (JSONL)")->required();

  auto* eval = app.add_subcommand("eval", "Metric report from a verdict dump, or win rate");
  std::string eval_verdicts, eval_gold, eval_candidate, eval_reference;
  eval->add_option("--verdicts", eval_verdicts, "Verdict dump (JSONL)");
  eval->add_option("--gold", eval_gold, "Gold pairs (JSONL)");
  auto* cand_opt = eval->add_option("--candidate", eval_candidate, "Candidate responses {instruction, response}");
  auto* ref_opt = eval->add_option("--reference", eval_reference, "Reference responses {instruction, response}");
  cand_opt->needs(ref_opt);
  ref_opt->needs(cand_opt);

  auto* baseline = app.add_subcommand("baseline", "Scalar metric as a pairwise judge over gold pairs");
  std::string baseline_gold, baseline_metric, baseline_corpus;
  std::optional<std::size_t> baseline_L;
  std::optional<double> baseline_band;
  baseline->add_option("--gold", baseline_gold, "Gold pairs (JSONL)")->required();
  baseline->add_option("--metric", baseline_metric, "PPL, DSI or CINDEX");
  baseline->add_option("--corpus", baseline_corpus, "Reference corpus for CINDEX");
  baseline->add_option("--L", baseline_L, "Minimum matched n-gram length for CINDEX");
  baseline->add_option("--tie-band", baseline_band, "Relative tie band");

  auto* tournament = app.add_subcommand("tournament", "Round-robin tournaments over candidate sets");

  auto* dpo = app.add_subcommand("dpo-export", "DPO and SFT exports");
  std::string dpo_variant;
  dpo->add_option("--variant", dpo_variant, "PLAIN, NEGATIVE, E100, E70H30 or CUSTOM(h)");

  auto* serve = app.add_subcommand("anno-serve", "Annotation service");
  std::string anno_items, anno_raters, anno_export, anno_gold_out, anno_policy = "all";
  std::optional<std::uint64_t> anno_seed;
  std::size_t anno_per_group = 10;
  bool anno_no_serve = false;
  std::optional<int> anno_port;
  serve->add_option("--create", anno_items, "Create a campaign from items (JSONL)");
  serve->add_option("--raters", anno_raters, "Comma-separated annotator ids for --create");
  serve->add_option("--campaign-seed", anno_seed, "Order seed for --create (default: stage seed)");
  serve->add_option("--export", anno_export, "Write gold pairs of this campaign and exit");
  serve->add_option("--gold-out", anno_gold_out, "Destination for --export (default <out>/gold.jsonl)");
  serve->add_option("--policy", anno_policy, "Pairing policy for --export: all or sample");
  serve->add_option("--per-group", anno_per_group, "Pairs per group for --policy sample");
  serve->add_option("--port", anno_port, "Listen port");
  serve->add_flag("--no-serve", anno_no_serve, "Do not start the HTTP server");

  auto* report = app.add_subcommand("report", "Summarize the output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    auto cfg = load_config(g);
    if (baseline->parsed()) {
      if (!baseline_corpus.empty()) cfg.baseline.corpus = fs::absolute(baseline_corpus);
      if (baseline_L) cfg.baseline.L = *baseline_L;
      if (baseline_band) cfg.baseline.rule.tie_band = *baseline_band;
    }
    if (anno_port) cfg.anno.server.port = *anno_port;
    std::optional<fs::path> mock;
    if (!g.mock.empty()) {
      if (!fs::exists(g.mock)) throw Error(ErrorKind::FileMissing, "mock script " + g.mock);
      mock = fs::absolute(g.mock);
    }
    pipeline::Context ctx(cfg, mock);

    if (ingest->parsed()) {
      print(pipeline::run_ingest(ctx));
    } else if (standardize->parsed()) {
      print(pipeline::run_standardize(ctx));
    } else if (augment->parsed()) {
      print(pipeline::run_augment(ctx));
    } else if (label->parsed()) {
      std::optional<synthesis::ExportVariant> v;
      if (!export_variant.empty()) v = synthesis::parse_export_variant(export_variant);
      print(pipeline::run_label(ctx, v));
    } else if (judge_cmd->parsed()) {
      print(pipeline::run_judge(ctx, judge_gold));
    } else if (eval->parsed()) {
      if (!eval_candidate.empty()) {
        print(pipeline::run_win_rate(ctx, eval_candidate, eval_reference));
      } else {
        if (eval_verdicts.empty() || eval_gold.empty()) {
          throw Error(ErrorKind::InvalidArgument, "eval needs --verdicts and --gold, or --candidate and --reference");
        }
        auto r = pipeline::run_eval(ctx, eval_verdicts, eval_gold);
        std::cout << metaeval::format_report(r.overall, "overall");
        for (const auto& [group, gr] : r.groups) std::cout << metaeval::format_report(gr, "group " + group);
        if (r.groups.size() > 1) std::cout << metaeval::format_report(r.group_mean, "group mean");
      }
    } else if (baseline->parsed()) {
      std::optional<baselines::Metric> m;
      if (!baseline_metric.empty()) m = baselines::parse_metric(baseline_metric);
      print(pipeline::run_baseline(ctx, baseline_gold, m));
    } else if (tournament->parsed()) {
      print(pipeline::run_tournament(ctx));
    } else if (dpo->parsed()) {
      std::optional<rankdpo::VariantSpec> v;
      if (!dpo_variant.empty()) v = rankdpo::parse_variant(dpo_variant);
      print(pipeline::run_dpo_export(ctx, v));
    } else if (serve->parsed()) {
      const auto store = cfg.anno.store_dir.empty() ? cfg.out_dir / "anno" : cfg.anno.store_dir;
      anno::AnnoService service(store, cfg.anno.snapshot_every);
      Json summary = Json::object();
      if (!anno_items.empty()) {
        const auto items = jsonl::read_as<anno::AnnotationItem>(anno_items);
        ctx.input(anno_items);
        const auto raters = split_csv(anno_raters);
        auto created = service.create_campaign(items, raters, anno_seed.value_or(cfg.stage_seed("anno-serve")));
        Json sessions = Json::array();
        for (const auto& s : created.sessions) {
          sessions.push_back({{"session_id", s.session_id}, {"annotator_id", s.annotator_id}, {"token", s.token}});
        }
        summary["campaign_id"] = created.campaign_id;
        summary["sessions"] = sessions.size();
        print(Json{{"campaign_id", created.campaign_id}, {"sessions", sessions}});
      }
      if (!anno_export.empty()) {
        anno::ExportOptions opts;
        if (anno_policy == "sample") {
          opts.policy = anno::PairingPolicy::SampleWithinGroup;
        } else if (anno_policy != "all") {
          throw Error(ErrorKind::InvalidArgument, "policy must be all or sample");
        }
        opts.per_group = anno_per_group;
        opts.seed = cfg.stage_seed("gold-export");
        opts.thresholds = cfg.gold;
        const auto pairs = service.export_gold(anno_export, opts);
        const fs::path dest = anno_gold_out.empty() ? ctx.out("gold.jsonl") : fs::path(anno_gold_out);
        jsonl::write(dest, jsonl::to_values(pairs));
        ctx.output(dest);
        summary["exported_pairs"] = pairs.size();
        print(Json{{"campaign_id", anno_export}, {"pairs", pairs.size()}, {"path", dest.string()}});
      }
      ctx.finish_stage("anno-serve", summary);
      if (anno_export.empty() && !anno_no_serve) {
        std::cerr << "annoservice listening on " << cfg.anno.server.host << ":" << cfg.anno.server.port << "\n";
        anno::serve(service, cfg.anno.server);
      }
    } else if (report->parsed()) {
      print(pipeline::run_report(ctx));
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
