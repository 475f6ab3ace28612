#include "pairjudge/annoservice.hpp"

#include <fcntl.h>
#include <openssl/rand.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "httplib.h"
#include "pairjudge/digest.hpp"
#include "pairjudge/error.hpp"
#include "pairjudge/jsonl.hpp"
#include "pairjudge/rng.hpp"

namespace pairjudge::anno {

namespace fs = std::filesystem;

void to_json(Json& j, const AnnotationItem& i) {
  j = Json{{"item_id", i.item_id}, {"instruction", i.instruction}, {"response", i.response}, {"group_id", i.group_id}};
}

void from_json(const Json& j, AnnotationItem& i) {
  i.item_id = j.at("item_id").get<std::string>();
  i.instruction = j.at("instruction").get<std::string>();
  i.response = j.at("response").get<std::string>();
  i.group_id = j.value("group_id", i.instruction);
}

void to_json(Json& j, const RatingRecord& r) {
  j = Json{{"annotator_id", r.annotator_id},
           {"item_id", r.item_id},
           {"rating", r.rating},
           {"submitted_at", r.submitted_at}};
}

void from_json(const Json& j, RatingRecord& r) {
  r.annotator_id = j.at("annotator_id").get<std::string>();
  r.item_id = j.at("item_id").get<std::string>();
  r.rating = j.at("rating").get<int>();
  r.submitted_at = j.value("submitted_at", "");
}

void to_json(Json& j, const Aggregate& a) {
  Json matrix = Json::array();
  for (const auto& row : a.matrix) {
    Json r = Json::array();
    for (double x : row) r.push_back(std::isfinite(x) ? Json(x) : Json(nullptr));
    matrix.push_back(std::move(r));
  }
  j = Json{{"campaign_id", a.campaign_id},
           {"item_ids", a.item_ids},
           {"raters", a.raters},
           {"matrix", matrix},
           {"means", a.means},
           {"rater_completion", a.rater_completion},
           {"coverage", a.coverage},
           {"complete", a.complete()},
           {"icc", a.icc ? Json(*a.icc) : Json(nullptr)}};
  if (a.icc_error) j["icc_error"] = *a.icc_error;
}

namespace {

struct State {
  Campaign campaign;
  std::map<std::string, AnnotatorSession> sessions;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string random_token() {
  unsigned char buf[16];
  if (RAND_bytes(buf, sizeof buf) != 1) throw Error(ErrorKind::Io, "RAND_bytes failed");
  std::ostringstream os;
  for (unsigned char b : buf) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(b);
  return os.str();
}

std::vector<std::string> presentation_order(const std::vector<AnnotationItem>& items, std::uint64_t order_seed) {
  Rng rng(order_seed);
  std::vector<std::string> order;
  order.reserve(items.size());
  for (auto i : rng.permutation(items.size())) order.push_back(items[i].item_id);
  return order;
}

State state_from_create(const Json& ev) {
  State s;
  const auto& c = ev.at("campaign");
  s.campaign.campaign_id = c.at("campaign_id").get<std::string>();
  s.campaign.items = c.at("items").get<std::vector<AnnotationItem>>();
  s.campaign.raters = c.at("raters").get<std::vector<std::string>>();
  s.campaign.seed = c.at("seed").get<std::uint64_t>();
  for (const auto& g : ev.at("sessions")) {
    AnnotatorSession a;
    a.session_id = g.at("session_id").get<std::string>();
    a.campaign_id = s.campaign.campaign_id;
    a.annotator_id = g.at("annotator_id").get<std::string>();
    a.token = g.at("token").get<std::string>();
    a.order_seed = g.at("order_seed").get<std::uint64_t>();
    a.order = presentation_order(s.campaign.items, a.order_seed);
    s.campaign.session_ids.push_back(a.session_id);
    s.sessions.emplace(a.session_id, std::move(a));
  }
  return s;
}

Json create_event(const State& s) {
  Json sessions = Json::array();
  for (const auto& id : s.campaign.session_ids) {
    const auto& a = s.sessions.at(id);
    sessions.push_back(Json{{"session_id", a.session_id},
                            {"annotator_id", a.annotator_id},
                            {"token", a.token},
                            {"order_seed", a.order_seed}});
  }
  return Json{{"type", "create"},
              {"campaign",
               Json{{"campaign_id", s.campaign.campaign_id},
                    {"items", s.campaign.items},
                    {"raters", s.campaign.raters},
                    {"seed", s.campaign.seed}}},
              {"sessions", sessions}};
}

void apply_rating(State& s, const Json& ev) {
  const auto session_id = ev.at("session_id").get<std::string>();
  auto it = s.sessions.find(session_id);
  if (it == s.sessions.end()) throw Error(ErrorKind::InvalidArgument, "log rating for unknown session " + session_id);
  auto& sess = it->second;
  auto rec = ev.at("record").get<RatingRecord>();
  if (sess.completed() || sess.order[sess.cursor] != rec.item_id) {
    throw Error(ErrorKind::InvalidArgument, "log rating out of order for session " + session_id);
  }
  ++sess.cursor;
  s.campaign.ratings.push_back(std::move(rec));
}

void apply_event(std::optional<State>& s, const Json& ev) {
  const auto type = ev.at("type").get<std::string>();
  if (type == "create") {
    if (s) throw Error(ErrorKind::InvalidArgument, "second create event in one log");
    s = state_from_create(ev);
  } else if (type == "rating") {
    if (!s) throw Error(ErrorKind::InvalidArgument, "rating before create");
    apply_rating(*s, ev);
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown log event '" + type + "'");
  }
}

/// Log lines; a torn final line (crash mid-append) is ignored.
std::vector<Json> read_log(const fs::path& log) {
  auto rr = jsonl::read(log);
  for (const auto& bad : rr.bad_lines) {
    const bool last = rr.line_numbers.empty() || bad.line_number > rr.line_numbers.back();
    if (!last || rr.bad_lines.size() > 1) {
      throw Error(ErrorKind::InvalidArgument, log.string() + ":" + std::to_string(bad.line_number) + ": " + bad.message);
    }
  }
  return rr.values;
}

void append_line(const fs::path& path, const std::string& line) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) throw Error(ErrorKind::Io, "cannot open " + path.string());
  const std::string data = line + "\n";
  const char* p = data.data();
  std::size_t left = data.size();
  while (left > 0) {
    const auto n = ::write(fd, p, left);
    if (n < 0) {
      ::close(fd);
      throw Error(ErrorKind::Io, "write failed on " + path.string());
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
}

}  // namespace

AnnoService::AnnoService(fs::path root, std::size_t snapshot_every, Clock clock, TokenSource tokens)
    : root_(std::move(root)),
      snapshot_every_(snapshot_every),
      clock_(clock ? std::move(clock) : Clock(utc_now)),
      tokens_(tokens ? std::move(tokens) : TokenSource(random_token)) {
  fs::create_directories(root_);
  load();
}

std::pair<Campaign, std::map<std::string, AnnotatorSession>> AnnoService::replay_log(const fs::path& log) {
  std::optional<State> s;
  for (const auto& ev : read_log(log)) apply_event(s, ev);
  if (!s) throw Error(ErrorKind::InvalidArgument, log.string() + ": empty campaign log");
  return {std::move(s->campaign), std::move(s->sessions)};
}

void AnnoService::load() {
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root_)) {
    if (entry.is_directory() && fs::exists(entry.path() / "log.jsonl")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    const auto events = read_log(dir / "log.jsonl");
    std::optional<State> s;
    std::size_t start = 0;
    const auto snap_path = dir / "snapshot.json";
    if (fs::exists(snap_path)) {
      const auto snap = Json::parse(jsonl::read_file(snap_path));
      const auto applied = snap.at("events").get<std::size_t>();
      if (applied <= events.size() && applied > 0) {
        s = state_from_create(events.front());
        for (const auto& r : snap.at("ratings")) {
          apply_rating(*s, r);
        }
        start = applied;
      }
    }
    for (std::size_t i = start; i < events.size(); ++i) apply_event(s, events[i]);
    if (!s) continue;
    Stored stored{std::move(s->campaign), events.size(), 0};
    for (auto& [id, sess] : s->sessions) sessions_.emplace(id, std::move(sess));
    campaigns_.emplace(stored.campaign.campaign_id, std::move(stored));
  }
}

void AnnoService::write_snapshot(const std::string& campaign_id, Stored& s) {
  // ratings are stored as the log events that produced them
  Json ratings = Json::array();
  std::map<std::string, std::string> session_of;
  for (const auto& sid : s.campaign.session_ids) session_of[sessions_.at(sid).annotator_id] = sid;
  for (const auto& r : s.campaign.ratings) {
    ratings.push_back(Json{{"type", "rating"}, {"session_id", session_of.at(r.annotator_id)}, {"record", r}});
  }
  const Json snap{{"events", s.events}, {"campaign_id", campaign_id}, {"ratings", ratings}};
  const auto path = root_ / campaign_id / "snapshot.json";
  const auto tmp = root_ / campaign_id / "snapshot.json.tmp";
  jsonl::write_file(tmp, jsonl::dump(snap) + "\n");
  fs::rename(tmp, path);
  s.since_snapshot = 0;
}

void AnnoService::snapshot_all() {
  std::lock_guard lock(mu_);
  for (auto& [id, s] : campaigns_) write_snapshot(id, s);
}

CampaignCreated AnnoService::create_campaign(const std::vector<AnnotationItem>& items,
                                             const std::vector<std::string>& raters, std::uint64_t seed) {
  if (items.empty()) throw Error(ErrorKind::EmptyInput, "campaign needs at least one item");
  if (raters.size() < 2) throw Error(ErrorKind::TooFewRaters, "campaign needs at least 2 raters");
  std::set<std::string> ids;
  for (const auto& i : items) {
    if (i.item_id.empty()) throw Error(ErrorKind::InvalidArgument, "empty item id");
    if (!ids.insert(i.item_id).second) throw Error(ErrorKind::DuplicateItemIds, i.item_id);
  }
  std::set<std::string> rater_set;
  for (const auto& r : raters) {
    if (r.empty() || !rater_set.insert(r).second) throw Error(ErrorKind::InvalidArgument, "rater ids must be distinct");
  }

  std::lock_guard lock(mu_);
  const auto base = digest_fields({jsonl::dump(Json(items)), jsonl::dump(Json(raters)), std::to_string(seed)});
  std::string campaign_id;
  for (std::size_t n = 0;; ++n) {
    campaign_id = "c" + digest_fields({base, std::to_string(n)}).substr(0, 12);
    if (!campaigns_.count(campaign_id) && !fs::exists(root_ / campaign_id)) break;
  }

  State s;
  s.campaign.campaign_id = campaign_id;
  s.campaign.items = items;
  s.campaign.raters = raters;
  s.campaign.seed = seed;
  std::set<std::uint64_t> seeds;
  for (std::size_t r = 0; r < raters.size(); ++r) {
    AnnotatorSession a;
    std::ostringstream sid;
    sid << campaign_id << "-s" << std::setw(3) << std::setfill('0') << r;
    a.session_id = sid.str();
    a.campaign_id = campaign_id;
    a.annotator_id = raters[r];
    a.token = tokens_();
    a.order_seed = derive_seed(seed, "session/" + raters[r]);
    for (std::uint64_t bump = 0; !seeds.insert(a.order_seed).second; ++bump) {
      a.order_seed = derive_seed(seed, "session/" + raters[r] + "/" + std::to_string(bump));
    }
    a.order = presentation_order(items, a.order_seed);
    s.campaign.session_ids.push_back(a.session_id);
    s.sessions.emplace(a.session_id, std::move(a));
  }

  fs::create_directories(root_ / campaign_id);
  const auto ev = create_event(s);
  append_line(root_ / campaign_id / "log.jsonl", jsonl::dump(ev));

  CampaignCreated out{campaign_id, {}};
  for (const auto& sid : s.campaign.session_ids) {
    const auto& a = s.sessions.at(sid);
    out.sessions.push_back({a.session_id, a.annotator_id, a.token});
  }
  for (auto& [id, sess] : s.sessions) sessions_.emplace(id, std::move(sess));
  campaigns_.emplace(campaign_id, Stored{std::move(s.campaign), 1, 0});
  return out;
}

AnnotatorSession& AnnoService::authorize(const std::string& session_id, const std::string& token) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorKind::NotFound, "session " + session_id);
  // constant-time comparison of equal-length tokens
  const auto& expected = it->second.token;
  unsigned diff = expected.size() ^ token.size();
  for (std::size_t i = 0; i < std::min(expected.size(), token.size()); ++i) {
    diff |= static_cast<unsigned char>(expected[i]) ^ static_cast<unsigned char>(token[i]);
  }
  if (diff != 0) throw Error(ErrorKind::Unauthorized, "bad token for session " + session_id);
  return it->second;
}

NextItem AnnoService::next_item(const std::string& session_id, const std::string& token) {
  std::lock_guard lock(mu_);
  const auto& sess = authorize(session_id, token);
  const auto& c = campaigns_.at(sess.campaign_id).campaign;
  NextItem out;
  out.progress = {sess.cursor, sess.order.size()};
  if (sess.completed()) return out;
  const auto& id = sess.order[sess.cursor];
  for (const auto& item : c.items) {
    if (item.item_id == id) {
      out.item = item;
      break;
    }
  }
  return out;
}

Progress AnnoService::submit_rating(const std::string& session_id, const std::string& token,
                                    const std::string& item_id, const Json& rating) {
  std::lock_guard lock(mu_);
  auto& sess = authorize(session_id, token);
  if (sess.completed()) throw Error(ErrorKind::SessionClosed, "session " + session_id + " is complete");
  if (!rating.is_number_integer() || rating.get<std::int64_t>() < 1 || rating.get<std::int64_t>() > 4) {
    throw Error(ErrorKind::InvalidRating, "rating must be an integer 1..4, got " + rating.dump());
  }
  const auto pos = std::find(sess.order.begin(), sess.order.end(), item_id);
  if (pos == sess.order.end()) throw Error(ErrorKind::NotFound, "item " + item_id + " not in campaign");
  if (static_cast<std::size_t>(pos - sess.order.begin()) < sess.cursor) {
    throw Error(ErrorKind::DuplicateRating, "item " + item_id + " already rated in session " + session_id);
  }
  if (*pos != sess.order[sess.cursor]) {
    throw Error(ErrorKind::OutOfOrderSubmission, "expected item " + sess.order[sess.cursor] + ", got " + item_id);
  }
  RatingRecord rec{sess.annotator_id, item_id, static_cast<int>(rating.get<std::int64_t>()), clock_()};
  const Json ev{{"type", "rating"}, {"session_id", session_id}, {"record", rec}};
  auto& stored = campaigns_.at(sess.campaign_id);
  // write-ahead: the log line lands before in-memory state moves
  append_line(root_ / sess.campaign_id / "log.jsonl", jsonl::dump(ev));
  ++sess.cursor;
  stored.campaign.ratings.push_back(std::move(rec));
  ++stored.events;
  if (snapshot_every_ > 0 && ++stored.since_snapshot >= snapshot_every_) write_snapshot(sess.campaign_id, stored);
  return {sess.cursor, sess.order.size()};
}

Aggregate AnnoService::aggregate(const std::string& campaign_id) const {
  std::lock_guard lock(mu_);
  auto it = campaigns_.find(campaign_id);
  if (it == campaigns_.end()) throw Error(ErrorKind::NotFound, "campaign " + campaign_id);
  const auto& c = it->second.campaign;
  Aggregate a;
  a.campaign_id = campaign_id;
  a.raters = c.raters;
  std::map<std::string, std::size_t> row_of;
  for (const auto& item : c.items) {
    row_of.emplace(item.item_id, a.item_ids.size());
    a.item_ids.push_back(item.item_id);
  }
  std::map<std::string, std::size_t> col_of;
  for (std::size_t r = 0; r < c.raters.size(); ++r) col_of.emplace(c.raters[r], r);
  a.matrix.assign(c.items.size(), std::vector<double>(c.raters.size(), std::numeric_limits<double>::quiet_NaN()));
  std::vector<std::size_t> per_rater(c.raters.size(), 0);
  for (const auto& r : c.ratings) {
    a.matrix[row_of.at(r.item_id)][col_of.at(r.annotator_id)] = r.rating;
    ++per_rater[col_of.at(r.annotator_id)];
  }
  for (std::size_t i = 0; i < a.item_ids.size(); ++i) {
    double sum = 0.0;
    std::size_t n = 0;
    for (double x : a.matrix[i]) {
      if (std::isfinite(x)) {
        sum += x;
        ++n;
      }
    }
    if (n > 0) a.means[a.item_ids[i]] = sum / static_cast<double>(n);
  }
  for (std::size_t r = 0; r < c.raters.size(); ++r) {
    a.rater_completion[c.raters[r]] = static_cast<double>(per_rater[r]) / static_cast<double>(c.items.size());
  }
  a.coverage = static_cast<double>(c.ratings.size()) / static_cast<double>(c.items.size() * c.raters.size());
  if (a.complete()) {
    try {
      a.icc = metaeval::icc_2k(a.matrix);
    } catch (const Error& e) {
      a.icc_error = e.what();
    }
  }
  return a;
}

Aggregate AnnoService::aggregate_complete(const std::string& campaign_id) const {
  auto a = aggregate(campaign_id);
  if (!a.complete()) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << "coverage " << a.coverage * 100.0 << "%;";
    for (const auto& [rater, done] : a.rater_completion) os << " " << rater << "=" << done * 100.0 << "%";
    throw Error(ErrorKind::IncompleteMatrix, os.str());
  }
  return a;
}

std::vector<metaeval::GoldPair> AnnoService::export_gold(const std::string& campaign_id,
                                                         const ExportOptions& opts) const {
  const auto a = aggregate_complete(campaign_id);
  std::map<std::string, metaeval::ScoredItem> table;
  {
    std::lock_guard lock(mu_);
    for (const auto& item : campaigns_.at(campaign_id).campaign.items) {
      table.emplace(item.item_id,
                    metaeval::ScoredItem{item.item_id, item.group_id, item.instruction, item.response,
                                         a.means.at(item.item_id)});
    }
  }
  const auto pairing = opts.policy == PairingPolicy::AllWithinGroup
                           ? metaeval::pair_all_within_group(table)
                           : metaeval::pair_sample_within_group(table, opts.per_group, opts.seed);
  auto pairs = metaeval::derive_gold_pairs(table, pairing, opts.thresholds);
  std::erase_if(pairs, [](const metaeval::GoldPair& g) { return g.label == metaeval::GoldLabel::Excluded; });
  return pairs;
}

std::vector<std::string> AnnoService::campaign_ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, _] : campaigns_) out.push_back(id);
  return out;
}

const Campaign& AnnoService::campaign(const std::string& campaign_id) const {
  std::lock_guard lock(mu_);
  auto it = campaigns_.find(campaign_id);
  if (it == campaigns_.end()) throw Error(ErrorKind::NotFound, "campaign " + campaign_id);
  return it->second.campaign;
}

const AnnotatorSession& AnnoService::session(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorKind::NotFound, "session " + session_id);
  return it->second;
}

// ---------------------------------------------------------------------------
// HTTP

int http_status(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotFound: return 404;
    case ErrorKind::Unauthorized: return 401;
    case ErrorKind::SessionClosed:
    case ErrorKind::OutOfOrderSubmission:
    case ErrorKind::DuplicateRating:
    case ErrorKind::IncompleteMatrix: return 409;
    case ErrorKind::Io: return 500;
    default: return 400;
  }
}

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(jsonl::dump(body), "application/json");
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_json(res, http_status(e.kind()), Json{{"error", error_kind_name(e.kind())}, {"message", e.what()}});
    } catch (const Json::exception& e) {
      send_json(res, 400, Json{{"error", "InvalidArgument"}, {"message", e.what()}});
    }
  };
}

void require_admin(const httplib::Request& req, const ServerOptions& opts) {
  if (opts.admin_token.empty()) return;
  if (req.get_header_value("X-Admin-Token") != opts.admin_token) {
    throw Error(ErrorKind::Unauthorized, "admin token required");
  }
}

Json progress_json(const Progress& p) { return Json{{"done", p.done}, {"total", p.total}}; }

std::uint64_t query_u64(const httplib::Request& req, const std::string& key, std::uint64_t fallback) {
  if (!req.has_param(key)) return fallback;
  try {
    return std::stoull(req.get_param_value(key));
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidArgument, "query parameter " + key + " must be a non-negative integer");
  }
}

}  // namespace

void mount(httplib::Server& server, AnnoService& service, const ServerOptions& opts) {
  server.set_default_headers({{"Access-Control-Allow-Origin", opts.cors_origin},
                              {"Access-Control-Allow-Headers", "Content-Type, X-Annotator-Token, X-Admin-Token"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Post("/campaigns", guarded([&service, opts](const httplib::Request& req, httplib::Response& res) {
                require_admin(req, opts);
                const auto body = Json::parse(req.body);
                const auto created = service.create_campaign(body.at("items").get<std::vector<AnnotationItem>>(),
                                                             body.at("raters").get<std::vector<std::string>>(),
                                                             body.value("seed", std::uint64_t{0}));
                Json sessions = Json::array();
                for (const auto& s : created.sessions) {
                  sessions.push_back(
                      Json{{"session_id", s.session_id}, {"annotator_id", s.annotator_id}, {"token", s.token}});
                }
                send_json(res, 201, Json{{"campaign_id", created.campaign_id}, {"sessions", sessions}});
              }));

  server.Get(R"(/sessions/([^/]+)/next)", guarded([&service](const httplib::Request& req, httplib::Response& res) {
               const auto next = service.next_item(req.matches[1], req.get_header_value("X-Annotator-Token"));
               Json body{{"done", !next.item.has_value()}, {"progress", progress_json(next.progress)}};
               body["item"] = next.item ? Json(*next.item) : Json(nullptr);
               send_json(res, 200, body);
             }));

  server.Post(R"(/sessions/([^/]+)/ratings)",
              guarded([&service](const httplib::Request& req, httplib::Response& res) {
                const auto body = Json::parse(req.body);
                if (!body.contains("rating")) throw Error(ErrorKind::InvalidRating, "missing rating");
                const auto p = service.submit_rating(req.matches[1], req.get_header_value("X-Annotator-Token"),
                                                     body.at("item_id").get<std::string>(), body.at("rating"));
                send_json(res, 200, Json{{"ok", true}, {"progress", progress_json(p)}});
              }));

  server.Get(R"(/campaigns/([^/]+)/aggregate)",
             guarded([&service, opts](const httplib::Request& req, httplib::Response& res) {
               require_admin(req, opts);
               send_json(res, 200, Json(service.aggregate(req.matches[1])));
             }));

  server.Get(R"(/campaigns/([^/]+)/export)",
             guarded([&service, opts](const httplib::Request& req, httplib::Response& res) {
               require_admin(req, opts);
               ExportOptions eo;
               const auto policy = req.has_param("policy") ? req.get_param_value("policy") : "all";
               if (policy == "sample") {
                 eo.policy = PairingPolicy::SampleWithinGroup;
               } else if (policy != "all") {
                 throw Error(ErrorKind::InvalidArgument, "policy must be 'all' or 'sample'");
               }
               eo.per_group = query_u64(req, "per_group", eo.per_group);
               eo.seed = query_u64(req, "seed", eo.seed);
               send_json(res, 200, Json(service.export_gold(req.matches[1], eo)));
             }));
}

void serve(AnnoService& service, const ServerOptions& opts) {
  httplib::Server server;
  mount(server, service, opts);
  if (!server.listen(opts.host, opts.port)) {
    throw Error(ErrorKind::Io, "cannot listen on " + opts.host + ":" + std::to_string(opts.port));
  }
}

}  // namespace pairjudge::anno
