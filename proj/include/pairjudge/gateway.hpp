#pragma once

// Uniform access to chat, completion-with-logprobs and embedding endpoints.
//
// Every call is reduced to a canonical JSON request envelope. Backends map an
// envelope to a payload (chat: string, logprobs: [{token, logprob}],
// embed: [[...], ...]). Decorators for caching and retries wrap any backend, and
// the fingerprint of an envelope keys both the cache and the mock script.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "pairjudge/core.hpp"

namespace pairjudge::gateway {

enum class Role { System, User, Assistant };

struct ChatMessage {
  Role role = Role::User;
  std::string content;
};

struct ChatRequest {
  std::string model_id;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 1024;
  std::optional<std::int64_t> seed;
};

struct TokenLogProb {
  std::string token;
  double logprob = 0.0;
};

struct EmbeddingVector {
  std::vector<double> values;
  std::size_t dim() const noexcept { return values.size(); }
};

/// Canonical envelopes. These are the only inputs to fingerprint().
Json chat_envelope(const ChatRequest& req);
Json logprobs_envelope(const std::string& model_id, const std::string& text);
Json embed_envelope(const std::string& model_id, const std::vector<std::string>& units);

/// SHA-256 hex of the canonical dump of an envelope.
std::string fingerprint(const Json& envelope);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual Json invoke(const Json& envelope) = 0;
};

/// Replies from a {request_fingerprint, reply} table. Unknown fingerprints throw
/// UnknownFingerprint; nothing is ever fabricated.
class MockBackend : public Backend {
 public:
  MockBackend() = default;
  explicit MockBackend(std::map<std::string, Json> script) : script_(std::move(script)) {}

  static std::shared_ptr<MockBackend> from_file(const std::filesystem::path& path);

  void add(std::string fingerprint, Json reply);
  Json invoke(const Json& envelope) override;
  std::size_t size() const { return script_.size(); }

 private:
  std::map<std::string, Json> script_;
};

/// Programmatic backend for tests and fixture authoring.
class FunctionBackend : public Backend {
 public:
  using Fn = std::function<Json(const Json& envelope)>;
  explicit FunctionBackend(Fn fn) : fn_(std::move(fn)) {}
  Json invoke(const Json& envelope) override { return fn_(envelope); }

 private:
  Fn fn_;
};

/// Wraps a backend and records every {request_fingerprint, reply} it serves, in
/// fingerprint order, so a run can be replayed later through MockBackend.
class RecordingBackend : public Backend {
 public:
  explicit RecordingBackend(std::shared_ptr<Backend> inner) : inner_(std::move(inner)) {}
  Json invoke(const Json& envelope) override;
  std::vector<Json> script() const;

 private:
  std::shared_ptr<Backend> inner_;
  mutable std::mutex mu_;
  std::map<std::string, Json> seen_;
};

/// Directory of <fingerprint>.json files holding {key, created_at, request, response}.
class CachingBackend : public Backend {
 public:
  CachingBackend(std::shared_ptr<Backend> inner, std::filesystem::path dir);
  Json invoke(const Json& envelope) override;

  std::size_t hits() const noexcept { return hits_.load(); }
  std::size_t misses() const noexcept { return misses_.load(); }

 private:
  std::optional<Json> lookup(const std::string& key) const;
  void store(const std::string& key, const Json& envelope, const Json& response) const;

  std::shared_ptr<Backend> inner_;
  std::filesystem::path dir_;
  mutable std::shared_mutex mu_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;
  std::chrono::milliseconds max_delay{60000};
  std::uint64_t jitter_seed = 0x5eed;

  /// Full jitter: uniform in [0, min(max_delay, base * factor^attempt)].
  std::chrono::milliseconds delay_for(int attempt, double unit_draw) const;
};

/// Retries EndpointUnreachable and RateLimited; other errors pass straight through.
/// After the budget is spent the last error is rethrown with its original kind.
class RetryingBackend : public Backend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;
  RetryingBackend(std::shared_ptr<Backend> inner, RetryPolicy policy, Sleeper sleeper = {});
  Json invoke(const Json& envelope) override;

 private:
  std::shared_ptr<Backend> inner_;
  RetryPolicy policy_;
  Sleeper sleeper_;
  std::mutex rng_mu_;
  std::uint64_t rng_state_;
};

struct HttpConfig {
  std::string base_url;  // e.g. http://localhost:8000/v1
  std::string api_key;
  std::chrono::seconds timeout{120};
};

/// OpenAI-compatible JSON over HTTP(S): /chat/completions, /completions (echo +
/// logprobs) and /embeddings.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpConfig cfg);
  Json invoke(const Json& envelope) override;

  /// Response-body parsers, exposed for tests.
  static Json parse_chat_response(const Json& body);
  static Json parse_logprobs_response(const Json& body);
  static Json parse_embedding_response(const Json& body, std::size_t expected);

 private:
  Json post(const std::string& path, const Json& body) const;

  HttpConfig cfg_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

struct GatewayConfig {
  std::string base_url;
  std::string api_key;
  std::filesystem::path cache_dir;  // empty = no cache
  std::size_t concurrency = 4;

  /// PAIRJUDGE_BASE_URL, PAIRJUDGE_API_KEY, PAIRJUDGE_CACHE_DIR, PAIRJUDGE_CONCURRENCY.
  static GatewayConfig from_env();
};

/// Typed front end. Shareable across threads; at most `concurrency` calls are
/// in flight at once.
class Gateway {
 public:
  explicit Gateway(std::shared_ptr<Backend> backend, std::size_t concurrency = 4);

  /// HTTP backend with retries, wrapped by the cache when cache_dir is set.
  static std::shared_ptr<Gateway> from_config(const GatewayConfig& cfg);

  /// Mock backend loaded from a script file, optionally behind a cache.
  static std::shared_ptr<Gateway> mock(const std::filesystem::path& script,
                                       const std::filesystem::path& cache_dir = {});

  std::string chat(const ChatRequest& req);
  std::vector<TokenLogProb> complete_with_logprobs(const std::string& model_id, const std::string& text);
  std::vector<EmbeddingVector> embed(const std::string& model_id, const std::vector<std::string>& units);

  std::size_t call_count() const noexcept { return calls_.load(); }
  std::size_t max_in_flight() const noexcept { return max_in_flight_.load(); }

 private:
  Json invoke(const Json& envelope);

  std::shared_ptr<Backend> backend_;
  std::size_t concurrency_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t in_flight_ = 0;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> max_in_flight_{0};
};

/// Single-user-message chat request helper.
ChatRequest user_prompt(std::string model_id, std::string prompt, double temperature,
                        int max_tokens, std::optional<std::int64_t> seed = std::nullopt);

}  // namespace pairjudge::gateway
