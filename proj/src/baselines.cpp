#include "pairjudge/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pairjudge/error.hpp"
#include "pairjudge/similarity.hpp"

namespace pairjudge::baselines {

double ppl(const std::string& text, gateway::Gateway& gw, const std::string& model_id) {
  if (text::trim(text).empty()) throw Error(ErrorKind::EmptyInput, "perplexity of empty text");
  const auto lps = gw.complete_with_logprobs(model_id, text);
  if (lps.empty()) throw Error(ErrorKind::EmptyInput, "no scored tokens");
  double sum = 0.0;
  for (const auto& t : lps) sum += t.logprob;
  return std::exp(-sum / static_cast<double>(lps.size()));
}

std::string_view granularity_name(Granularity g) noexcept { return g == Granularity::Token ? "TOKEN" : "SEGMENT"; }

Granularity parse_granularity(std::string_view s) {
  if (s == "TOKEN") return Granularity::Token;
  if (s == "SEGMENT") return Granularity::Segment;
  throw Error(ErrorKind::InvalidArgument, "unknown DSI granularity '" + std::string(s) + "'");
}

std::vector<std::string> dsi_units(const std::string& text, Granularity g) {
  if (g == Granularity::Segment) return text::split_segments(text);
  return text::split_units(text, text::detect_unit(text));
}

double dsi(const std::string& text, gateway::Gateway& gw, const std::string& embed_model, Granularity g) {
  const auto units = dsi_units(text, g);
  if (units.size() < 2) {
    throw Error(ErrorKind::TooFewUnits, "DSI needs at least 2 units, got " + std::to_string(units.size()));
  }
  const auto embeddings = gw.embed(embed_model, units);
  std::vector<std::vector<double>> vectors;
  vectors.reserve(embeddings.size());
  for (const auto& e : embeddings) vectors.push_back(e.values);
  const auto d = pairwise_cosine_distances(vectors);
  return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
}

// ---------------------------------------------------------------------------

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::string_view kUnitSep = "\x1f";
constexpr std::array<char, 8> kMagic = {'P', 'J', 'N', 'G', 'R', 'A', 'M', '\0'};

std::uint64_t extend(std::uint64_t h, const std::string& unit) { return fnv1a(kUnitSep, fnv1a(unit, h)); }

void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b.data(), b.size());
}

std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), b.size())) {
    throw Error(ErrorKind::IndexFormat, "truncated index file");
  }
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

}  // namespace

NGramIndex::NGramIndex(std::size_t n_min, std::size_t n_max, text::Unit unit)
    : n_min_(n_min), n_max_(n_max), unit_(unit) {
  if (n_min < 2 || n_max < n_min) {
    throw Error(ErrorKind::InvalidArgument,
                "n-gram range must satisfy 2 <= n_min <= n_max, got [" + std::to_string(n_min) + ", " +
                    std::to_string(n_max) + "]");
  }
}

void NGramIndex::add_document(std::string_view doc) {
  const auto units = text::split_units(doc, unit_);
  ++documents_;
  sealed_ = false;
  for (std::size_t i = 0; i < units.size(); ++i) {
    std::uint64_t h = kFnvOffset;
    for (std::size_t n = 1; n <= n_max_ && i + n <= units.size(); ++n) {
      h = extend(h, units[i + n - 1]);
      if (n >= n_min_) {
        table_.push_back(h);
        ++ngrams_;
      }
    }
  }
}

void NGramIndex::seal() {
  std::sort(table_.begin(), table_.end());
  table_.erase(std::unique(table_.begin(), table_.end()), table_.end());
  sealed_ = true;
}

std::uint64_t NGramIndex::hash_units(const std::vector<std::string>& units, std::size_t begin, std::size_t len) {
  std::uint64_t h = kFnvOffset;
  for (std::size_t i = begin; i < begin + len; ++i) h = extend(h, units[i]);
  return h;
}

bool NGramIndex::contains_hash(std::uint64_t h) const {
  if (!sealed_) throw Error(ErrorKind::InvalidArgument, "index queried before seal()");
  return std::binary_search(table_.begin(), table_.end(), h);
}

bool NGramIndex::contains(const std::vector<std::string>& units, std::size_t begin, std::size_t len) const {
  if (len < n_min_ || len > n_max_ || begin + len > units.size()) return false;
  return contains_hash(hash_units(units, begin, len));
}

void NGramIndex::save(const std::filesystem::path& path) const {
  if (!sealed_) throw Error(ErrorKind::InvalidArgument, "index saved before seal()");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
  os.write(kMagic.data(), kMagic.size());
  put_u64(os, kFormatVersion);
  put_u64(os, n_min_);
  put_u64(os, n_max_);
  put_u64(os, unit_ == text::Unit::CodePoint ? 0 : 1);
  put_u64(os, documents_);
  put_u64(os, ngrams_);
  put_u64(os, table_.size());
  for (auto h : table_) put_u64(os, h);
  if (!os) throw Error(ErrorKind::Io, "short write to " + path.string());
}

NGramIndex NGramIndex::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::FileMissing, path.string());
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) {
    throw Error(ErrorKind::IndexFormat, path.string() + ": not an n-gram index");
  }
  const auto version = get_u64(is);
  if (version != kFormatVersion) {
    throw Error(ErrorKind::IndexFormat, path.string() + ": unsupported version " + std::to_string(version));
  }
  const auto n_min = get_u64(is);
  const auto n_max = get_u64(is);
  const auto unit = get_u64(is);
  if (unit > 1) throw Error(ErrorKind::IndexFormat, path.string() + ": bad unit tag");
  NGramIndex idx(n_min, n_max, unit == 0 ? text::Unit::CodePoint : text::Unit::Word);
  idx.documents_ = get_u64(is);
  idx.ngrams_ = get_u64(is);
  const auto count = get_u64(is);
  // 64 header bytes; checked before allocating so a corrupt count cannot OOM
  const auto size = std::filesystem::file_size(path);
  if (count > (size - 64) / 8 || size != 64 + 8 * count) {
    throw Error(ErrorKind::IndexFormat, path.string() + ": size does not match the stored hash count");
  }
  idx.table_.resize(count);
  for (auto& h : idx.table_) h = get_u64(is);
  if (!std::is_sorted(idx.table_.begin(), idx.table_.end()) ||
      std::adjacent_find(idx.table_.begin(), idx.table_.end()) != idx.table_.end()) {
    throw Error(ErrorKind::IndexFormat, path.string() + ": hash table is not sorted and unique");
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorKind::IndexFormat, path.string() + ": trailing bytes");
  }
  return idx;
}

NGramIndex build_index(const std::vector<std::string>& corpus, std::size_t n_min, std::size_t n_max,
                       text::Unit unit) {
  if (corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "no documents to index");
  NGramIndex idx(n_min, n_max, unit);
  for (const auto& doc : corpus) idx.add_document(doc);
  idx.seal();
  return idx;
}

double creativity_index(const std::string& text, const NGramIndex& idx, std::size_t L) {
  if (L < idx.n_min() || L > idx.n_max()) {
    throw Error(ErrorKind::InvalidArgument, "L=" + std::to_string(L) + " outside index range [" +
                                                std::to_string(idx.n_min()) + ", " + std::to_string(idx.n_max()) +
                                                "]");
  }
  const auto units = text::split_units(text, idx.unit());
  const auto n = units.size();
  if (n < L) {
    throw Error(ErrorKind::TextTooShort,
                "text has " + std::to_string(n) + " units, L=" + std::to_string(L));
  }
  std::size_t covered = 0;
  std::size_t cover_end = 0;  // positions [0, cover_end) already decided
  for (std::size_t i = 0; i + L <= n; ++i) {
    std::size_t longest = 0;
    std::uint64_t h = kFnvOffset;
    for (std::size_t m = 1; m <= idx.n_max() && i + m <= n; ++m) {
      h = extend(h, units[i + m - 1]);
      if (m >= L && idx.contains_hash(h)) longest = m;
    }
    if (longest == 0) continue;
    const auto end = i + longest;
    if (end > cover_end) {
      covered += end - std::max(cover_end, i);
      cover_end = end;
    }
  }
  return 1.0 - static_cast<double>(covered) / static_cast<double>(n);
}

// ---------------------------------------------------------------------------

std::string_view metric_name(Metric m) noexcept {
  switch (m) {
    case Metric::Ppl: return "PPL";
    case Metric::Dsi: return "DSI";
    case Metric::CIndex: return "CINDEX";
  }
  return "CINDEX";
}

Metric parse_metric(std::string_view s) {
  if (s == "PPL") return Metric::Ppl;
  if (s == "DSI") return Metric::Dsi;
  if (s == "CINDEX") return Metric::CIndex;
  throw Error(ErrorKind::InvalidArgument, "unknown metric '" + std::string(s) + "'");
}

void ScalarVerdictRule::validate() const {
  if (!(tie_band >= 0.0 && tie_band < 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "tie_band must lie in [0, 1)");
  }
}

Label scalar_verdict(double m1, double m2, const ScalarVerdictRule& rule) {
  if (!std::isfinite(m1) || !std::isfinite(m2)) throw Error(ErrorKind::InvalidArgument, "non-finite metric value");
  const double scale = std::max({std::abs(m1), std::abs(m2), 1e-12});
  if (std::abs(m1 - m2) <= rule.tie_band * scale) return Label::Tie;
  return m1 > m2 ? Label::First : Label::Second;
}

ScalarJudge::ScalarJudge(ScalarVerdictRule rule, Scorer scorer) : rule_(rule), scorer_(std::move(scorer)) {
  rule_.validate();
}

double ScalarJudge::score(const std::string& text) {
  {
    std::lock_guard lock(mu_);
    if (auto it = memo_.find(text); it != memo_.end()) return it->second;
  }
  const double v = scorer_(text);
  std::lock_guard lock(mu_);
  memo_.emplace(text, v);
  return v;
}

judge::JudgeOutcome ScalarJudge::judge(const std::string&, const std::string& r1, const std::string& r2) {
  judge::JudgeOutcome out;
  double m1 = 0.0;
  double m2 = 0.0;
  try {
    m1 = score(r1);
    m2 = score(r2);
  } catch (const Error& e) {
    // texts the metric cannot score are reported like unparseable verdicts
    if (e.kind() != ErrorKind::TextTooShort && e.kind() != ErrorKind::TooFewUnits &&
        e.kind() != ErrorKind::EmptyInput) {
      throw;
    }
    out.raw = e.what();
    out.parse_path = judge::ParsePath::Failed;
    return out;
  }
  out.verdict = scalar_verdict(m1, m2, rule_);
  out.parse_path = judge::ParsePath::Tag;
  std::ostringstream os;
  os.precision(17);
  os << metric_name(rule_.metric) << " " << m1 << " vs " << m2 << "\nVERDICT: "
     << (*out.verdict == Label::First ? "1" : *out.verdict == Label::Second ? "2" : "TIE");
  out.raw = os.str();
  out.rationale = out.raw.substr(0, out.raw.find('\n'));
  return out;
}

}  // namespace pairjudge::baselines
