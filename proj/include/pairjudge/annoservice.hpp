#pragma once

// Human annotation campaigns: per-annotator randomized presentation, 4-point
// Likert capture into an append-only log, aggregation with ICC(2,k) and gold
// pair export. The HTTP layer is a thin mapping onto AnnoService.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pairjudge/core.hpp"
#include "pairjudge/error.hpp"
#include "pairjudge/metaeval.hpp"

namespace httplib {
class Server;
}

namespace pairjudge::anno {

struct AnnotationItem {
  std::string item_id;
  std::string instruction;
  std::string response;
  std::string group_id;
  bool operator==(const AnnotationItem&) const = default;
};

void to_json(Json& j, const AnnotationItem& i);
void from_json(const Json& j, AnnotationItem& i);

struct RatingRecord {
  std::string annotator_id;
  std::string item_id;
  int rating = 0;
  std::string submitted_at;
  bool operator==(const RatingRecord&) const = default;
};

void to_json(Json& j, const RatingRecord& r);
void from_json(const Json& j, RatingRecord& r);

struct AnnotatorSession {
  std::string session_id;
  std::string campaign_id;
  std::string annotator_id;
  std::string token;
  std::uint64_t order_seed = 0;
  std::vector<std::string> order;  // item ids in presentation order
  std::size_t cursor = 0;
  bool completed() const noexcept { return cursor >= order.size(); }
  bool operator==(const AnnotatorSession&) const = default;
};

struct Campaign {
  std::string campaign_id;
  std::vector<AnnotationItem> items;
  std::vector<std::string> raters;
  std::uint64_t seed = 0;
  std::vector<std::string> session_ids;  // parallel to raters
  std::vector<RatingRecord> ratings;     // in submission order
  bool operator==(const Campaign&) const = default;
};

struct Progress {
  std::size_t done = 0;
  std::size_t total = 0;
};

struct NextItem {
  std::optional<AnnotationItem> item;  // empty when the session is done
  Progress progress;
};

struct SessionGrant {
  std::string session_id;
  std::string annotator_id;
  std::string token;
};

struct CampaignCreated {
  std::string campaign_id;
  std::vector<SessionGrant> sessions;
};

struct Aggregate {
  std::string campaign_id;
  std::vector<std::string> item_ids;          // matrix rows
  std::vector<std::string> raters;            // matrix columns
  metaeval::RatingMatrix matrix;              // NaN for missing cells
  std::map<std::string, double> means;        // items with at least one rating
  std::map<std::string, double> rater_completion;
  double coverage = 0.0;
  std::optional<double> icc;                  // only for complete matrices
  std::optional<std::string> icc_error;       // e.g. DegenerateVariance

  bool complete() const noexcept { return coverage == 1.0; }
};

void to_json(Json& j, const Aggregate& a);

enum class PairingPolicy { AllWithinGroup, SampleWithinGroup };

struct ExportOptions {
  PairingPolicy policy = PairingPolicy::AllWithinGroup;
  std::size_t per_group = 10;  // SampleWithinGroup only
  std::uint64_t seed = 0;
  metaeval::GoldThresholds thresholds;
};

/// Campaign state with durable storage under `root/<campaign_id>/`:
/// `log.jsonl` (append-only events) and `snapshot.json` (state after the
/// first `events` log lines). State is rebuilt on construction.
class AnnoService {
 public:
  using Clock = std::function<std::string()>;
  using TokenSource = std::function<std::string()>;

  explicit AnnoService(std::filesystem::path root, std::size_t snapshot_every = 100, Clock clock = {},
                       TokenSource tokens = {});

  /// Throws EmptyInput, TooFewRaters, DuplicateItemIds or InvalidArgument.
  CampaignCreated create_campaign(const std::vector<AnnotationItem>& items, const std::vector<std::string>& raters,
                                  std::uint64_t seed);

  /// NotFound for unknown sessions, Unauthorized for a wrong token.
  NextItem next_item(const std::string& session_id, const std::string& token);

  /// SessionClosed, InvalidRating, DuplicateRating, OutOfOrderSubmission.
  Progress submit_rating(const std::string& session_id, const std::string& token, const std::string& item_id,
                         const Json& rating);

  Aggregate aggregate(const std::string& campaign_id) const;
  /// Like aggregate() but IncompleteMatrix unless every rater rated every item.
  Aggregate aggregate_complete(const std::string& campaign_id) const;

  /// Pairs within each group, thresholded; EXCLUDED pairs are dropped.
  std::vector<metaeval::GoldPair> export_gold(const std::string& campaign_id, const ExportOptions& opts = {}) const;

  std::vector<std::string> campaign_ids() const;
  const Campaign& campaign(const std::string& campaign_id) const;
  const AnnotatorSession& session(const std::string& session_id) const;

  /// Writes snapshots for every campaign now.
  void snapshot_all();

  /// Rebuilds one campaign from its log alone, ignoring any snapshot.
  static std::pair<Campaign, std::map<std::string, AnnotatorSession>> replay_log(const std::filesystem::path& log);

 private:
  struct Stored {
    Campaign campaign;
    std::size_t events = 0;
    std::size_t since_snapshot = 0;
  };

  void load();
  void write_snapshot(const std::string& campaign_id, Stored& s);
  AnnotatorSession& authorize(const std::string& session_id, const std::string& token);

  std::filesystem::path root_;
  std::size_t snapshot_every_;
  Clock clock_;
  TokenSource tokens_;
  mutable std::mutex mu_;
  std::map<std::string, Stored> campaigns_;
  std::map<std::string, AnnotatorSession> sessions_;
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8088;
  std::string cors_origin = "*";
  std::string admin_token;  // when set, campaign endpoints require X-Admin-Token
};

/// Registers the HTTP endpoints on `server`.
void mount(httplib::Server& server, AnnoService& service, const ServerOptions& opts);

/// HTTP status for a service error.
int http_status(ErrorKind kind) noexcept;

/// Blocks serving until the server is stopped.
void serve(AnnoService& service, const ServerOptions& opts);

}  // namespace pairjudge::anno
