#include "pairjudge/metaeval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "pairjudge/error.hpp"
#include "pairjudge/rng.hpp"

namespace pairjudge::metaeval {

namespace {

constexpr std::size_t idx(Label l) noexcept { return static_cast<std::size_t>(l); }

std::size_t row_sum(const Confusion3& c, std::size_t k) { return c.counts[k][0] + c.counts[k][1] + c.counts[k][2]; }
std::size_t col_sum(const Confusion3& c, std::size_t k) { return c.counts[0][k] + c.counts[1][k] + c.counts[2][k]; }

double class_f1(const Confusion3& c, std::size_t k) {
  const auto denom = row_sum(c, k) + col_sum(c, k);
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(c.counts[k][k]) / static_cast<double>(denom);
}

void require_nonempty(const Confusion3& c) {
  if (c.total() == 0) throw Error(ErrorKind::EmptyInput, "empty confusion matrix");
}

}  // namespace

std::size_t Confusion3::total() const noexcept {
  std::size_t t = 0;
  for (const auto& row : counts) t += row[0] + row[1] + row[2];
  return t;
}

std::size_t Confusion3::at(Label gold, Label pred) const noexcept { return counts[idx(gold)][idx(pred)]; }

Confusion3 confusion(const std::vector<Label>& pred, const std::vector<Label>& gold) {
  if (pred.size() != gold.size()) {
    throw Error(ErrorKind::LengthMismatch,
                std::to_string(pred.size()) + " predictions vs " + std::to_string(gold.size()) + " gold labels");
  }
  if (pred.empty()) throw Error(ErrorKind::EmptyInput, "no verdicts to tally");
  Confusion3 c;
  for (std::size_t i = 0; i < pred.size(); ++i) ++c.counts[idx(gold[i])][idx(pred[i])];
  return c;
}

double macro_f1(const Confusion3& c) {
  require_nonempty(c);
  return (class_f1(c, 0) + class_f1(c, 1) + class_f1(c, 2)) / 3.0;
}

double weighted_f1(const Confusion3& c) {
  require_nonempty(c);
  double sum = 0.0;
  for (std::size_t k = 0; k < 3; ++k) sum += class_f1(c, k) * static_cast<double>(row_sum(c, k));
  return sum / static_cast<double>(c.total());
}

double f1(const Confusion3& c, F1Average avg) { return avg == F1Average::Macro ? macro_f1(c) : weighted_f1(c); }

double agreement(const Confusion3& c) {
  require_nonempty(c);
  const auto diag = c.counts[0][0] + c.counts[1][1] + c.counts[2][2];
  return static_cast<double>(diag) / static_cast<double>(c.total());
}

double cohen_kappa(const Confusion3& c) {
  const double po = agreement(c);
  const double n = static_cast<double>(c.total());
  double pe = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    pe += (static_cast<double>(row_sum(c, k)) / n) * (static_cast<double>(col_sum(c, k)) / n);
  }
  if (pe == 1.0) return 0.0;
  return (po - pe) / (1.0 - pe);
}

double consistency_rate(const std::vector<Label>& forward, const std::vector<Label>& reverse) {
  if (forward.size() != reverse.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(forward.size()) + " forward vs " +
                                               std::to_string(reverse.size()) + " reverse verdicts");
  }
  if (forward.empty()) throw Error(ErrorKind::EmptyInput, "no verdict pairs");
  std::size_t ok = 0;
  for (std::size_t i = 0; i < forward.size(); ++i) ok += judge::is_consistent(forward[i], reverse[i]) ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(forward.size());
}

OrientationMetrics orientation_metrics(const std::vector<Label>& pred, const std::vector<Label>& gold,
                                       F1Average avg) {
  OrientationMetrics m;
  m.confusion = confusion(pred, gold);
  m.f1 = f1(m.confusion, avg);
  m.kappa = cohen_kappa(m.confusion);
  m.agreement = agreement(m.confusion);
  return m;
}

namespace {

std::string_view f1_average_name(F1Average a) { return a == F1Average::Macro ? "macro" : "weighted"; }

F1Average parse_f1_average(std::string_view s) {
  if (s == "macro") return F1Average::Macro;
  if (s == "weighted") return F1Average::Weighted;
  throw Error(ErrorKind::InvalidArgument, "unknown F1 average '" + std::string(s) + "'");
}

Json confusion_json(const Confusion3& c) {
  Json rows = Json::array();
  for (const auto& row : c.counts) rows.push_back(Json::array({row[0], row[1], row[2]}));
  return rows;
}

Confusion3 confusion_from_json(const Json& j) {
  Confusion3 c;
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t k = 0; k < 3; ++k) c.counts[r][k] = j.at(r).at(k).get<std::size_t>();
  }
  return c;
}

Json orientation_json(const OrientationMetrics& m) {
  return Json{{"f1", m.f1}, {"kappa", m.kappa}, {"agreement", m.agreement}, {"confusion", confusion_json(m.confusion)}};
}

OrientationMetrics orientation_from_json(const Json& j) {
  OrientationMetrics m;
  m.f1 = j.at("f1").get<double>();
  m.kappa = j.at("kappa").get<double>();
  m.agreement = j.at("agreement").get<double>();
  m.confusion = confusion_from_json(j.at("confusion"));
  return m;
}

}  // namespace

void to_json(Json& j, const MetricReport& r) {
  j = Json{{"macro_f1", r.macro_f1},
           {"kappa", r.kappa},
           {"agreement", r.agreement},
           {"consistency", r.consistency},
           {"scored", r.scored},
           {"excluded_unparseable", r.excluded_unparseable},
           {"f1_average", f1_average_name(r.f1_average)},
           {"forward", orientation_json(r.forward)},
           {"reverse", orientation_json(r.reverse)}};
}

void from_json(const Json& j, MetricReport& r) {
  r.macro_f1 = j.at("macro_f1").get<double>();
  r.kappa = j.at("kappa").get<double>();
  r.agreement = j.at("agreement").get<double>();
  r.consistency = j.at("consistency").get<double>();
  r.scored = j.at("scored").get<std::size_t>();
  r.excluded_unparseable = j.at("excluded_unparseable").get<std::size_t>();
  r.f1_average = parse_f1_average(j.value("f1_average", "macro"));
  r.forward = orientation_from_json(j.at("forward"));
  r.reverse = orientation_from_json(j.at("reverse"));
}

std::string format_report(const MetricReport& r, const std::string& title) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << title << "\n";
  os << "  " << std::left << std::setw(10) << "" << std::right << std::setw(9) << "F1" << std::setw(9) << "Kappa"
     << std::setw(9) << "Agree." << "\n";
  auto row = [&](const char* name, double f, double k, double a) {
    os << "  " << std::left << std::setw(10) << name << std::right << std::setw(9) << f << std::setw(9) << k
       << std::setw(9) << a << "\n";
  };
  row("forward", r.forward.f1, r.forward.kappa, r.forward.agreement);
  row("reverse", r.reverse.f1, r.reverse.kappa, r.reverse.agreement);
  row("mean", r.macro_f1, r.kappa, r.agreement);
  os << "  consistency " << r.consistency << ", scored " << r.scored << ", unparseable "
     << r.excluded_unparseable << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------

std::string_view gold_label_name(GoldLabel g) noexcept {
  switch (g) {
    case GoldLabel::First: return "FIRST";
    case GoldLabel::Second: return "SECOND";
    case GoldLabel::Tie: return "TIE";
    case GoldLabel::Excluded: return "EXCLUDED";
  }
  return "EXCLUDED";
}

GoldLabel parse_gold_label(std::string_view s) {
  if (s == "FIRST") return GoldLabel::First;
  if (s == "SECOND") return GoldLabel::Second;
  if (s == "TIE") return GoldLabel::Tie;
  if (s == "EXCLUDED") return GoldLabel::Excluded;
  throw Error(ErrorKind::InvalidArgument, "unknown gold label '" + std::string(s) + "'");
}

std::optional<Label> to_verdict(GoldLabel g) noexcept {
  switch (g) {
    case GoldLabel::First: return Label::First;
    case GoldLabel::Second: return Label::Second;
    case GoldLabel::Tie: return Label::Tie;
    case GoldLabel::Excluded: return std::nullopt;
  }
  return std::nullopt;
}

void to_json(Json& j, const GoldPair& g) {
  j = Json{{"pair_id", g.pair_id}, {"group", g.group}, {"instruction", g.instruction},
           {"r1", g.r1},           {"r2", g.r2},       {"mean1", g.mean1},
           {"mean2", g.mean2},     {"label", gold_label_name(g.label)}};
}

void from_json(const Json& j, GoldPair& g) {
  g.instruction = j.at("instruction").get<std::string>();
  g.r1 = j.at("r1").get<std::string>();
  g.r2 = j.at("r2").get<std::string>();
  g.pair_id = j.contains("pair_id") ? j.at("pair_id").get<std::string>() : pair_id(g.instruction, g.r1, g.r2, false);
  g.group = j.value("group", "");
  g.mean1 = j.value("mean1", 0.0);
  g.mean2 = j.value("mean2", 0.0);
  g.label = parse_gold_label(j.at("label").get<std::string>());
}

GoldLabel gold_label(double mean1, double mean2, const GoldThresholds& th) {
  const double diff = mean1 - mean2;
  const double mag = std::abs(diff);
  if (mag > th.distinct + th.epsilon) return diff > 0 ? GoldLabel::First : GoldLabel::Second;
  if (mag < th.tie - th.epsilon) return GoldLabel::Tie;
  return GoldLabel::Excluded;
}

std::vector<GoldPair> derive_gold_pairs(const std::map<std::string, ScoredItem>& table, const ItemPairing& pairing,
                                        const GoldThresholds& th) {
  std::vector<GoldPair> out;
  out.reserve(pairing.size());
  for (const auto& [a, b] : pairing) {
    const auto ia = table.find(a);
    const auto ib = table.find(b);
    if (ia == table.end() || ib == table.end()) {
      throw Error(ErrorKind::InvalidArgument, "pairing references unknown item " + (ia == table.end() ? a : b));
    }
    const auto& x = ia->second;
    const auto& y = ib->second;
    if (x.instruction != y.instruction) {
      throw Error(ErrorKind::InvalidArgument, "items " + a + " and " + b + " answer different instructions");
    }
    GoldPair g;
    g.pair_id = pair_id(x.instruction, x.response, y.response, false);
    g.group = x.group;
    g.instruction = x.instruction;
    g.r1 = x.response;
    g.r2 = y.response;
    g.mean1 = x.mean;
    g.mean2 = y.mean;
    g.label = gold_label(x.mean, y.mean, th);
    out.push_back(std::move(g));
  }
  return out;
}

namespace {

std::map<std::string, std::vector<std::string>> items_by_group(const std::map<std::string, ScoredItem>& table) {
  std::map<std::string, std::vector<std::string>> groups;
  for (const auto& [id, item] : table) groups[item.group].push_back(id);  // ids arrive sorted
  return groups;
}

}  // namespace

ItemPairing pair_all_within_group(const std::map<std::string, ScoredItem>& table) {
  ItemPairing out;
  for (const auto& [group, ids] : items_by_group(table)) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) out.emplace_back(ids[i], ids[j]);
    }
  }
  return out;
}

ItemPairing pair_sample_within_group(const std::map<std::string, ScoredItem>& table, std::size_t per_group,
                                     std::uint64_t seed) {
  ItemPairing out;
  for (const auto& [group, ids] : items_by_group(table)) {
    ItemPairing all;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) all.emplace_back(ids[i], ids[j]);
    }
    Rng rng(derive_seed(seed, "gold-pairs/" + group));
    rng.shuffle(all);
    if (all.size() > per_group) all.resize(per_group);
    std::sort(all.begin(), all.end());
    out.insert(out.end(), all.begin(), all.end());
  }
  return out;
}

// ---------------------------------------------------------------------------

MetricReport report_from_verdicts(const std::vector<GoldPair>& pairs, const std::vector<SwapVerdicts>& verdicts,
                                  F1Average avg) {
  if (pairs.size() != verdicts.size()) {
    throw Error(ErrorKind::LengthMismatch, "gold pairs and verdicts differ in length");
  }
  std::vector<Label> fwd, rev, gold_f, gold_r;
  MetricReport r;
  r.f1_average = avg;
  std::size_t attempted = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto g = to_verdict(pairs[i].label);
    if (!g) continue;
    ++attempted;
    const auto& v = verdicts[i];
    if (!v.forward || !v.reverse) {
      ++r.excluded_unparseable;
      continue;
    }
    fwd.push_back(*v.forward);
    rev.push_back(*v.reverse);
    gold_f.push_back(*g);
    gold_r.push_back(complement(*g));
  }
  if (attempted == 0) throw Error(ErrorKind::AllExcluded, "every gold pair is EXCLUDED");
  if (fwd.empty()) throw Error(ErrorKind::AllExcluded, "every pair has an unparseable verdict");
  r.scored = fwd.size();
  r.forward = orientation_metrics(fwd, gold_f, avg);
  r.reverse = orientation_metrics(rev, gold_r, avg);
  r.macro_f1 = (r.forward.f1 + r.reverse.f1) / 2.0;
  r.kappa = (r.forward.kappa + r.reverse.kappa) / 2.0;
  r.agreement = (r.forward.agreement + r.reverse.agreement) / 2.0;
  r.consistency = consistency_rate(fwd, rev);
  return r;
}

MetricReport swap_averaged_report(const Evaluator& evaluator, const std::vector<GoldPair>& pairs, F1Average avg) {
  std::vector<SwapVerdicts> verdicts(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (p.label == GoldLabel::Excluded) continue;
    verdicts[i].forward = evaluator(p.instruction, p.r1, p.r2);
    verdicts[i].reverse = evaluator(p.instruction, p.r2, p.r1);
  }
  return report_from_verdicts(pairs, verdicts, avg);
}

Evaluator evaluator_from(judge::PairJudge& judge) {
  return [&judge](const std::string& i, const std::string& r1, const std::string& r2) {
    return judge.judge(i, r1, r2).verdict;
  };
}

void to_json(Json& j, const EvalResult& r) {
  Json groups = Json::object();
  for (const auto& [name, rep] : r.groups) groups[name] = rep;
  j = Json{{"overall", r.overall}, {"groups", groups}, {"group_mean", r.group_mean}};
}

EvalResult evaluate_dump(const std::vector<judge::DumpRow>& rows, const std::vector<GoldPair>& gold, F1Average avg) {
  std::map<std::string, SwapVerdicts> by_pair;
  std::map<std::string, std::pair<bool, bool>> seen;
  for (const auto& row : rows) {
    auto& s = seen[row.pair_id];
    auto& v = by_pair[row.pair_id];
    if (row.orientation == judge::Orientation::Forward) {
      if (s.first) throw Error(ErrorKind::InvalidArgument, "duplicate forward verdict for " + row.pair_id);
      s.first = true;
      v.forward = row.verdict;
    } else {
      if (s.second) throw Error(ErrorKind::InvalidArgument, "duplicate reverse verdict for " + row.pair_id);
      s.second = true;
      v.reverse = row.verdict;
    }
  }

  std::map<std::string, std::pair<std::vector<GoldPair>, std::vector<SwapVerdicts>>> grouped;
  std::vector<SwapVerdicts> all;
  std::set<std::string> gold_ids;
  for (const auto& g : gold) {
    if (!gold_ids.insert(g.pair_id).second) throw Error(ErrorKind::InvalidArgument, "duplicate gold pair " + g.pair_id);
    SwapVerdicts v;
    if (g.label != GoldLabel::Excluded) {
      const auto it = seen.find(g.pair_id);
      if (it == seen.end() || !it->second.first || !it->second.second) {
        throw Error(ErrorKind::KeyMismatch, "verdict dump lacks both orientations for gold pair " + g.pair_id);
      }
      v = by_pair.at(g.pair_id);
    }
    all.push_back(v);
    auto& slot = grouped[g.group];
    slot.first.push_back(g);
    slot.second.push_back(v);
  }

  EvalResult out;
  out.overall = report_from_verdicts(gold, all, avg);
  std::size_t n = 0;
  out.group_mean.f1_average = avg;
  for (const auto& [name, slot] : grouped) {
    MetricReport rep;
    try {
      rep = report_from_verdicts(slot.first, slot.second, avg);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::AllExcluded) throw;
      continue;  // a group with nothing scoreable has no metrics to average
    }
    out.group_mean.macro_f1 += rep.macro_f1;
    out.group_mean.kappa += rep.kappa;
    out.group_mean.agreement += rep.agreement;
    out.group_mean.consistency += rep.consistency;
    out.group_mean.forward.f1 += rep.forward.f1;
    out.group_mean.forward.kappa += rep.forward.kappa;
    out.group_mean.forward.agreement += rep.forward.agreement;
    out.group_mean.reverse.f1 += rep.reverse.f1;
    out.group_mean.reverse.kappa += rep.reverse.kappa;
    out.group_mean.reverse.agreement += rep.reverse.agreement;
    out.group_mean.scored += rep.scored;
    out.group_mean.excluded_unparseable += rep.excluded_unparseable;
    out.groups.emplace(name, rep);
    ++n;
  }
  if (n > 0) {
    const double k = static_cast<double>(n);
    for (double* v : {&out.group_mean.macro_f1, &out.group_mean.kappa, &out.group_mean.agreement,
                      &out.group_mean.consistency, &out.group_mean.forward.f1, &out.group_mean.forward.kappa,
                      &out.group_mean.forward.agreement, &out.group_mean.reverse.f1, &out.group_mean.reverse.kappa,
                      &out.group_mean.reverse.agreement}) {
      *v /= k;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

double icc_2k(const RatingMatrix& m) {
  const std::size_t n = m.size();
  if (n < 2) throw Error(ErrorKind::IncompleteMatrix, "ICC needs at least 2 items");
  const std::size_t k = m.front().size();
  if (k < 2) throw Error(ErrorKind::IncompleteMatrix, "ICC needs at least 2 raters");
  for (std::size_t i = 0; i < n; ++i) {
    if (m[i].size() != k) throw Error(ErrorKind::IncompleteMatrix, "ragged rating matrix at item " + std::to_string(i));
    for (double x : m[i]) {
      if (!std::isfinite(x)) throw Error(ErrorKind::IncompleteMatrix, "missing rating at item " + std::to_string(i));
    }
  }
  // Sums of squares scaled by n*k, built from raw totals so that integer
  // ratings stay exact and identical raters give a residual of exactly 0.
  const double dn = static_cast<double>(n);
  const double dk = static_cast<double>(k);
  double total = 0.0;
  double sum_sq = 0.0;
  std::vector<double> rows(n, 0.0);
  std::vector<double> cols(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double x = m[i][j];
      total += x;
      sum_sq += x * x;
      rows[i] += x;
      cols[j] += x;
    }
  }
  const double t2 = total * total;
  double row_sq = 0.0;
  for (double r : rows) row_sq += r * r;
  double col_sq = 0.0;
  for (double c : cols) col_sq += c * c;
  const double ss_total = dn * dk * sum_sq - t2;
  const double ss_items = dn * row_sq - t2;
  const double ss_raters = dk * col_sq - t2;
  const double ss_error = ss_total - ss_items - ss_raters;

  const double ms_items = ss_items / (dn - 1.0);
  const double ms_raters = ss_raters / (dk - 1.0);
  const double ms_error = ss_error / ((dn - 1.0) * (dk - 1.0));
  const double denom = ms_items + (ms_raters - ms_error) / dn;
  if (denom == 0.0) throw Error(ErrorKind::DegenerateVariance, "ICC denominator is zero");
  return (ms_items - ms_error) / denom;
}

}  // namespace pairjudge::metaeval
