#include "pairjudge/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <thread>

#include "pairjudge/digest.hpp"
#include "pairjudge/error.hpp"
#include "pairjudge/jsonl.hpp"
#include "pairjudge/rng.hpp"

namespace pairjudge::gateway {

namespace {

std::string_view role_name(Role r) {
  switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool is_transient(ErrorKind k) {
  return k == ErrorKind::EndpointUnreachable || k == ErrorKind::RateLimited;
}

}  // namespace

Json chat_envelope(const ChatRequest& req) {
  Json messages = Json::array();
  for (const auto& m : req.messages) {
    messages.push_back(Json{{"role", role_name(m.role)}, {"content", m.content}});
  }
  Json env{{"kind", "chat"},
           {"model", req.model_id},
           {"messages", std::move(messages)},
           {"temperature", req.temperature},
           {"max_tokens", req.max_tokens}};
  env["seed"] = req.seed ? Json(*req.seed) : Json(nullptr);
  return env;
}

Json logprobs_envelope(const std::string& model_id, const std::string& text) {
  return Json{{"kind", "logprobs"}, {"model", model_id}, {"text", text}};
}

Json embed_envelope(const std::string& model_id, const std::vector<std::string>& units) {
  return Json{{"kind", "embed"}, {"model", model_id}, {"input", units}};
}

std::string fingerprint(const Json& envelope) { return sha256_hex(jsonl::dump(envelope)); }

ChatRequest user_prompt(std::string model_id, std::string prompt, double temperature,
                        int max_tokens, std::optional<std::int64_t> seed) {
  ChatRequest req;
  req.model_id = std::move(model_id);
  req.messages.push_back({Role::User, std::move(prompt)});
  req.temperature = temperature;
  req.max_tokens = max_tokens;
  req.seed = seed;
  return req;
}

// ---------------------------------------------------------------------------
// Mock / function / recording

std::shared_ptr<MockBackend> MockBackend::from_file(const std::filesystem::path& path) {
  auto mock = std::make_shared<MockBackend>();
  for (const auto& row : jsonl::read_strict(path)) {
    if (!row.contains("request_fingerprint") || !row.contains("reply")) {
      throw Error(ErrorKind::MalformedLine, path.string() + ": rows need request_fingerprint and reply");
    }
    mock->add(row.at("request_fingerprint").get<std::string>(), row.at("reply"));
  }
  return mock;
}

void MockBackend::add(std::string fp, Json reply) { script_[std::move(fp)] = std::move(reply); }

Json MockBackend::invoke(const Json& envelope) {
  const auto fp = fingerprint(envelope);
  auto it = script_.find(fp);
  if (it == script_.end()) {
    throw Error(ErrorKind::UnknownFingerprint,
                "no scripted reply for " + fp + " (" + envelope.value("kind", "?") + " " +
                    envelope.value("model", "?") + ")");
  }
  return it->second;
}

Json RecordingBackend::invoke(const Json& envelope) {
  auto reply = inner_->invoke(envelope);
  std::lock_guard lock(mu_);
  seen_[fingerprint(envelope)] = reply;
  return reply;
}

std::vector<Json> RecordingBackend::script() const {
  std::lock_guard lock(mu_);
  std::vector<Json> rows;
  for (const auto& [fp, reply] : seen_) rows.push_back(Json{{"request_fingerprint", fp}, {"reply", reply}});
  return rows;
}

// ---------------------------------------------------------------------------
// Cache

CachingBackend::CachingBackend(std::shared_ptr<Backend> inner, std::filesystem::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::optional<Json> CachingBackend::lookup(const std::string& key) const {
  std::shared_lock lock(mu_);
  const auto path = dir_ / (key + ".json");
  if (!std::filesystem::exists(path)) return std::nullopt;
  Json entry;
  try {
    entry = Json::parse(jsonl::read_file(path));
  } catch (const Json::parse_error&) {
    throw Error(ErrorKind::CacheCorrupt, path.string() + " is not valid JSON");
  }
  if (!entry.is_object() || entry.value("key", "") != key || !entry.contains("response")) {
    throw Error(ErrorKind::CacheCorrupt, path.string() + " does not match its key");
  }
  return entry.at("response");
}

void CachingBackend::store(const std::string& key, const Json& envelope, const Json& response) const {
  std::unique_lock lock(mu_);
  const auto path = dir_ / (key + ".json");
  const auto tmp = dir_ / (key + ".json.tmp");
  Json entry{{"key", key}, {"created_at", utc_now()}, {"request", envelope}, {"response", response}};
  jsonl::write_file(tmp, entry.dump(2));
  std::filesystem::rename(tmp, path);
}

Json CachingBackend::invoke(const Json& envelope) {
  const auto key = fingerprint(envelope);
  if (auto hit = lookup(key)) {
    ++hits_;
    return *hit;
  }
  ++misses_;
  auto response = inner_->invoke(envelope);
  store(key, envelope, response);
  return response;
}

// ---------------------------------------------------------------------------
// Retry

std::chrono::milliseconds RetryPolicy::delay_for(int attempt, double unit_draw) const {
  const double cap = std::min<double>(static_cast<double>(max_delay.count()),
                                      static_cast<double>(base_delay.count()) * std::pow(factor, attempt));
  return std::chrono::milliseconds(static_cast<std::int64_t>(std::floor(cap * std::clamp(unit_draw, 0.0, 1.0))));
}

RetryingBackend::RetryingBackend(std::shared_ptr<Backend> inner, RetryPolicy policy, Sleeper sleeper)
    : inner_(std::move(inner)),
      policy_(policy),
      sleeper_(sleeper ? std::move(sleeper) : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      rng_state_(policy.jitter_seed) {
  if (policy_.max_attempts < 1) throw Error(ErrorKind::InvalidConfig, "retry max_attempts must be >= 1");
}

Json RetryingBackend::invoke(const Json& envelope) {
  for (int attempt = 0;; ++attempt) {
    try {
      return inner_->invoke(envelope);
    } catch (const Error& e) {
      if (!is_transient(e.kind()) || attempt + 1 >= policy_.max_attempts) throw;
      double draw;
      {
        std::lock_guard lock(rng_mu_);
        Rng rng(rng_state_++);
        draw = rng.unit();
      }
      sleeper_(policy_.delay_for(attempt, draw));
    }
  }
}

// ---------------------------------------------------------------------------
// Gateway front end

GatewayConfig GatewayConfig::from_env() {
  GatewayConfig cfg;
  if (const char* v = std::getenv("PAIRJUDGE_BASE_URL")) cfg.base_url = v;
  if (const char* v = std::getenv("PAIRJUDGE_API_KEY")) cfg.api_key = v;
  if (const char* v = std::getenv("PAIRJUDGE_CACHE_DIR")) cfg.cache_dir = v;
  if (const char* v = std::getenv("PAIRJUDGE_CONCURRENCY")) {
    char* end = nullptr;
    const auto n = std::strtoull(v, &end, 10);
    if (end == v || *end != '\0' || n == 0) {
      throw Error(ErrorKind::InvalidConfig, "PAIRJUDGE_CONCURRENCY must be a positive integer");
    }
    cfg.concurrency = n;
  }
  return cfg;
}

Gateway::Gateway(std::shared_ptr<Backend> backend, std::size_t concurrency)
    : backend_(std::move(backend)), concurrency_(std::max<std::size_t>(1, concurrency)) {}

std::shared_ptr<Gateway> Gateway::from_config(const GatewayConfig& cfg) {
  if (cfg.base_url.empty()) {
    throw Error(ErrorKind::InvalidConfig, "gateway base_url is not configured");
  }
  std::shared_ptr<Backend> backend =
      std::make_shared<RetryingBackend>(std::make_shared<HttpBackend>(HttpConfig{cfg.base_url, cfg.api_key}),
                                        RetryPolicy{});
  if (!cfg.cache_dir.empty()) backend = std::make_shared<CachingBackend>(backend, cfg.cache_dir);
  return std::make_shared<Gateway>(std::move(backend), cfg.concurrency);
}

std::shared_ptr<Gateway> Gateway::mock(const std::filesystem::path& script,
                                       const std::filesystem::path& cache_dir) {
  std::shared_ptr<Backend> backend = MockBackend::from_file(script);
  if (!cache_dir.empty()) backend = std::make_shared<CachingBackend>(backend, cache_dir);
  return std::make_shared<Gateway>(std::move(backend), 1);
}

Json Gateway::invoke(const Json& envelope) {
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < concurrency_; });
    ++in_flight_;
    std::size_t seen = max_in_flight_.load();
    while (in_flight_ > seen && !max_in_flight_.compare_exchange_weak(seen, in_flight_)) {
    }
  }
  struct Release {
    Gateway* g;
    ~Release() {
      {
        std::lock_guard lock(g->mu_);
        --g->in_flight_;
      }
      g->cv_.notify_one();
    }
  } release{this};
  ++calls_;
  return backend_->invoke(envelope);
}

std::string Gateway::chat(const ChatRequest& req) {
  if (req.model_id.empty()) throw Error(ErrorKind::InvalidArgument, "chat request without model");
  if (req.messages.empty()) throw Error(ErrorKind::EmptyInput, "chat request without messages");
  if (!(req.temperature >= 0.0)) throw Error(ErrorKind::InvalidArgument, "temperature must be >= 0");
  const auto reply = invoke(chat_envelope(req));
  if (!reply.is_string()) throw Error(ErrorKind::MalformedResponse, "chat reply is not a string");
  return reply.get<std::string>();
}

std::vector<TokenLogProb> Gateway::complete_with_logprobs(const std::string& model_id,
                                                          const std::string& text) {
  if (text.empty()) throw Error(ErrorKind::EmptyInput, "cannot score empty text");
  const auto reply = invoke(logprobs_envelope(model_id, text));
  if (!reply.is_array()) throw Error(ErrorKind::MalformedResponse, "logprobs reply is not an array");
  std::vector<TokenLogProb> out;
  out.reserve(reply.size());
  for (const auto& row : reply) {
    if (!row.is_object() || !row.contains("logprob") || !row.at("logprob").is_number()) {
      throw Error(ErrorKind::MalformedResponse, "logprob entry without numeric logprob");
    }
    TokenLogProb t{row.value("token", ""), row.at("logprob").get<double>()};
    if (!std::isfinite(t.logprob)) throw Error(ErrorKind::MalformedResponse, "non-finite logprob");
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<EmbeddingVector> Gateway::embed(const std::string& model_id,
                                            const std::vector<std::string>& units) {
  if (units.empty()) throw Error(ErrorKind::EmptyInput, "embed called without units");
  for (const auto& u : units) {
    if (u.empty()) throw Error(ErrorKind::EmptyInput, "embed called with an empty unit");
  }
  const auto reply = invoke(embed_envelope(model_id, units));
  if (!reply.is_array() || reply.size() != units.size()) {
    throw Error(ErrorKind::MalformedResponse, "embedding reply does not have one vector per unit");
  }
  std::vector<EmbeddingVector> out;
  out.reserve(reply.size());
  for (const auto& row : reply) {
    if (!row.is_array() || row.empty()) throw Error(ErrorKind::MalformedResponse, "empty embedding vector");
    EmbeddingVector v;
    v.values.reserve(row.size());
    for (const auto& x : row) {
      if (!x.is_number()) throw Error(ErrorKind::MalformedResponse, "non-numeric embedding value");
      const double d = x.get<double>();
      if (!std::isfinite(d)) throw Error(ErrorKind::MalformedResponse, "non-finite embedding value");
      v.values.push_back(d);
    }
    if (!out.empty() && v.dim() != out.front().dim()) {
      throw Error(ErrorKind::DimensionMismatch, "embedding dims differ within one reply");
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace pairjudge::gateway
