#include "httplib.h"

#include <algorithm>

#include "pairjudge/error.hpp"
#include "pairjudge/gateway.hpp"

namespace pairjudge::gateway {

HttpBackend::HttpBackend(HttpConfig cfg) : cfg_(std::move(cfg)) {
  const auto scheme_end = cfg_.base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorKind::InvalidConfig, "base_url needs a scheme: " + cfg_.base_url);
  }
  const auto path_start = cfg_.base_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    scheme_host_port_ = cfg_.base_url;
  } else {
    scheme_host_port_ = cfg_.base_url.substr(0, path_start);
    path_prefix_ = cfg_.base_url.substr(path_start);
  }
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

Json HttpBackend::post(const std::string& path, const Json& body) const {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(cfg_.timeout);
  client.set_write_timeout(cfg_.timeout);
  httplib::Headers headers;
  if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

  auto res = client.Post(path_prefix_ + path, headers, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorKind::EndpointUnreachable,
                scheme_host_port_ + path_prefix_ + path + ": " + httplib::to_string(res.error()));
  }
  if (res->status == 429) throw Error(ErrorKind::RateLimited, res->body.substr(0, 500));
  if (res->status >= 500) {
    throw Error(ErrorKind::EndpointUnreachable,
                "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500));
  }
  if (res->status >= 400) {
    throw Error(ErrorKind::InvalidArgument,
                "endpoint rejected request, HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500));
  }
  try {
    return Json::parse(res->body);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::MalformedResponse, std::string("response body is not JSON: ") + e.what());
  }
}

Json HttpBackend::parse_chat_response(const Json& body) {
  try {
    const auto& content = body.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw Error(ErrorKind::MalformedResponse, "message content is not a string");
    return content;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::MalformedResponse, std::string("chat response: ") + e.what());
  }
}

Json HttpBackend::parse_logprobs_response(const Json& body) {
  const Json* lp = nullptr;
  try {
    lp = &body.at("choices").at(0).at("logprobs");
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::MalformedResponse, std::string("completion response: ") + e.what());
  }
  if (lp->is_null() || !lp->contains("token_logprobs") || !lp->contains("tokens")) {
    throw Error(ErrorKind::LogprobsUnsupported, "endpoint did not return token logprobs");
  }
  const auto& tokens = lp->at("tokens");
  const auto& values = lp->at("token_logprobs");
  if (!tokens.is_array() || !values.is_array() || tokens.size() != values.size()) {
    throw Error(ErrorKind::MalformedResponse, "tokens and token_logprobs differ in length");
  }
  Json out = Json::array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    // the first echoed token has no conditional probability
    if (values[i].is_null()) continue;
    out.push_back(Json{{"token", tokens[i]}, {"logprob", values[i]}});
  }
  return out;
}

Json HttpBackend::parse_embedding_response(const Json& body, std::size_t expected) {
  try {
    const auto& data = body.at("data");
    if (!data.is_array() || data.size() != expected) {
      throw Error(ErrorKind::MalformedResponse, "embedding count does not match input count");
    }
    std::vector<std::pair<std::size_t, Json>> rows;
    for (std::size_t i = 0; i < data.size(); ++i) {
      rows.emplace_back(data[i].value("index", i), data[i].at("embedding"));
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    Json out = Json::array();
    for (auto& [idx, v] : rows) out.push_back(std::move(v));
    return out;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::MalformedResponse, std::string("embedding response: ") + e.what());
  }
}

Json HttpBackend::invoke(const Json& envelope) {
  const auto kind = envelope.at("kind").get<std::string>();
  if (kind == "chat") {
    Json body{{"model", envelope.at("model")},
              {"messages", envelope.at("messages")},
              {"temperature", envelope.at("temperature")},
              {"max_tokens", envelope.at("max_tokens")},
              {"stream", false}};
    if (!envelope.at("seed").is_null()) body["seed"] = envelope.at("seed");
    return parse_chat_response(post("/chat/completions", body));
  }
  if (kind == "logprobs") {
    Json body{{"model", envelope.at("model")},
              {"prompt", envelope.at("text")},
              {"max_tokens", 0},
              {"echo", true},
              {"logprobs", 1},
              {"temperature", 0}};
    return parse_logprobs_response(post("/completions", body));
  }
  if (kind == "embed") {
    Json body{{"model", envelope.at("model")}, {"input", envelope.at("input")}};
    return parse_embedding_response(post("/embeddings", body), envelope.at("input").size());
  }
  throw Error(ErrorKind::InvalidArgument, "unknown envelope kind '" + kind + "'");
}

}  // namespace pairjudge::gateway
