#include "icsim/http_provider.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "icsim/error.hpp"

namespace icsim::providers {
namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string base;    // path prefix without trailing slash
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  const auto path = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  Endpoint e;
  e.origin = path == std::string::npos ? url : url.substr(0, path);
  e.base = path == std::string::npos ? "" : url.substr(path);
  while (!e.base.empty() && e.base.back() == '/') e.base.pop_back();
  return e;
}

httplib::Headers auth_headers(const ProviderConfig& config) {
  httplib::Headers headers;
  if (config.credential_env.empty()) return headers;
  const char* key = std::getenv(config.credential_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw ProviderError(ProviderErrorKind::kAuthentication,
                        "provider '" + config.id + "': environment variable " + config.credential_env + " is not set");
  }
  headers.emplace("Authorization", std::string("Bearer ") + key);
  return headers;
}

// POSTs `body` to `path` with retries; returns the parsed JSON response.
nlohmann::json post_json(const ProviderConfig& config, const std::string& path, const nlohmann::json& body) {
  const Endpoint ep = split_endpoint(config.endpoint);
  const httplib::Headers headers = auth_headers(config);
  const std::string payload = body.dump();
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(config.timeout - seconds);

  bool last_was_timeout = false;
  std::string last_error;
  for (int attempt = 0; attempt <= config.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config.retry_backoff * attempt);
    httplib::Client client(ep.origin);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    auto res = client.Post(ep.base + path, headers, payload, "application/json");
    if (!res) {
      const auto err = res.error();
      last_was_timeout = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
      last_error = httplib::to_string(err);
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw ProviderError(ProviderErrorKind::kAuthentication,
                          "provider '" + config.id + "': HTTP " + std::to_string(res->status));
    }
    if (res->status == 408 || res->status == 429 || res->status >= 500) {
      last_was_timeout = res->status == 408;
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw ProviderError(ProviderErrorKind::kBadResponse,
                          "provider '" + config.id + "': HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
      throw ProviderError(ProviderErrorKind::kBadResponse, "provider '" + config.id + "': response is not JSON");
    }
  }
  throw ProviderError(last_was_timeout ? ProviderErrorKind::kTimeout : ProviderErrorKind::kExhausted,
                      "provider '" + config.id + "': gave up after " + std::to_string(config.retries + 1) +
                          " attempts (" + last_error + ")");
}

}  // namespace

OpenAiGenerator::OpenAiGenerator(ProviderConfig config)
    : config_(std::move(config)), gate_(config_.max_in_flight, config_.rate_per_second) {}

std::string OpenAiGenerator::complete(const CompletionRequest& request) {
  validate(request);
  nlohmann::json body = {{"model", config_.model},
                         {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
                         {"max_tokens", request.max_output_tokens},
                         {"temperature", request.temperature}};
  if (request.seed) body["seed"] = *request.seed;
  const auto ticket = gate_.acquire();
  const nlohmann::json res = post_json(config_, "/chat/completions", body);
  try {
    const auto& content = res.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string{} : content.get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw ProviderError(ProviderErrorKind::kBadResponse, "provider '" + config_.id + "': unexpected completion schema");
  }
}

OpenAiEmbedder::OpenAiEmbedder(ProviderConfig config)
    : config_(std::move(config)), gate_(config_.max_in_flight, config_.rate_per_second) {}

EmbeddingVector OpenAiEmbedder::embed(std::string_view input) {
  const nlohmann::json body = {{"model", config_.model}, {"input", std::string(input)}};
  const auto ticket = gate_.acquire();
  const nlohmann::json res = post_json(config_, "/embeddings", body);
  EmbeddingVector v;
  try {
    v.values = res.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    throw ProviderError(ProviderErrorKind::kBadResponse, "provider '" + config_.id + "': unexpected embedding schema");
  }
  if (v.values.empty()) throw ProviderError(ProviderErrorKind::kBadResponse, "provider '" + config_.id + "': empty embedding");
  for (double x : v.values) {
    if (!std::isfinite(x)) throw ProviderError(ProviderErrorKind::kBadResponse, "provider '" + config_.id + "': non-finite embedding");
  }
  std::size_t expected = 0;
  if (!dimension_.compare_exchange_strong(expected, v.dimension()) && expected != v.dimension()) {
    throw ProviderError(ProviderErrorKind::kBadResponse, "provider '" + config_.id + "': embedding dimension changed");
  }
  return v;
}

}  // namespace icsim::providers
