#include "icsim/providers.hpp"

#include <algorithm>
#include <cmath>

#include "icsim/error.hpp"
#include "icsim/http_provider.hpp"
#include "icsim/stub_providers.hpp"

namespace icsim::providers {

void validate(const CompletionRequest& request) {
  if (request.prompt.empty()) throw ProviderError(ProviderErrorKind::kPrecondition, "prompt must be non-empty");
  if (request.max_output_tokens < 1) {
    throw ProviderError(ProviderErrorKind::kPrecondition, "max_output_tokens must be >= 1");
  }
  if (!(request.temperature >= 0.0)) {
    throw ProviderError(ProviderErrorKind::kPrecondition, "temperature must be >= 0");
  }
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) {
    throw InvalidArgument("embedding dimension mismatch: " + std::to_string(a.dimension()) + " vs " +
                          std::to_string(b.dimension()));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

void ProviderConfig::validate() const {
  if (id.empty()) throw ConfigError("provider without id");
  if (backend.rfind("stub:", 0) != 0 && backend != "http:openai") {
    throw ConfigError("provider '" + id + "': unknown backend '" + backend + "'");
  }
  if (backend == "http:openai" && endpoint.empty()) throw ConfigError("provider '" + id + "': endpoint required");
  if (retries < 0) throw ConfigError("provider '" + id + "': retry budget must be >= 0");
  if (max_in_flight < 1) throw ConfigError("provider '" + id + "': max_in_flight must be >= 1");
  if (rate_per_second < 0) throw ConfigError("provider '" + id + "': rate_per_second must be >= 0");
  if (timeout.count() <= 0) throw ConfigError("provider '" + id + "': timeout must be positive");
}

nlohmann::json ProviderConfig::to_json() const {
  return {{"id", id},
          {"backend", backend},
          {"endpoint", endpoint},
          {"model", model},
          {"credential_env", credential_env},
          {"timeout_ms", timeout.count()},
          {"retries", retries},
          {"retry_backoff_ms", retry_backoff.count()},
          {"max_in_flight", max_in_flight},
          {"rate_per_second", rate_per_second},
          {"options", options}};
}

ProviderConfig ProviderConfig::from_json(const nlohmann::json& j) {
  ProviderConfig c;
  c.id = j.at("id").get<std::string>();
  c.backend = j.at("backend").get<std::string>();
  c.endpoint = j.value("endpoint", "");
  c.model = j.value("model", "");
  c.credential_env = j.value("credential_env", "");
  c.timeout = std::chrono::milliseconds(j.value("timeout_ms", 60000));
  c.retries = j.value("retries", 2);
  c.retry_backoff = std::chrono::milliseconds(j.value("retry_backoff_ms", 250));
  c.max_in_flight = j.value("max_in_flight", 4);
  c.rate_per_second = j.value("rate_per_second", 0.0);
  c.options = j.value("options", nlohmann::json::object());
  c.validate();
  return c;
}

RequestGate::RequestGate(int max_in_flight, double rate_per_second)
    : max_in_flight_(std::max(1, max_in_flight)),
      rate_(std::max(0.0, rate_per_second)),
      burst_(std::max(1.0, rate_per_second)),
      tokens_(burst_),
      last_refill_(std::chrono::steady_clock::now()) {}

RequestGate::Ticket::~Ticket() {
  if (gate_ != nullptr) gate_->release();
}

RequestGate::Ticket RequestGate::acquire() {
  std::unique_lock lock(mu_);
  for (;;) {
    if (in_flight_ >= max_in_flight_) {
      cv_.wait(lock);
      continue;
    }
    if (rate_ > 0.0) {
      const auto now = std::chrono::steady_clock::now();
      const double elapsed = std::chrono::duration<double>(now - last_refill_).count();
      tokens_ = std::min(burst_, tokens_ + elapsed * rate_);
      last_refill_ = now;
      if (tokens_ < 1.0) {
        cv_.wait_for(lock, std::chrono::duration<double>((1.0 - tokens_) / rate_));
        continue;
      }
      tokens_ -= 1.0;
    }
    ++in_flight_;
    peak_ = std::max(peak_, in_flight_);
    return Ticket(this);
  }
}

void RequestGate::release() {
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_all();
}

int RequestGate::in_flight() const {
  std::lock_guard lock(mu_);
  return in_flight_;
}

int RequestGate::peak_in_flight() const {
  std::lock_guard lock(mu_);
  return peak_;
}

std::unique_ptr<TextGenerator> make_generator(const ProviderConfig& config) {
  config.validate();
  if (config.backend.rfind("stub:", 0) == 0) {
    return std::make_unique<StubGenerator>(config.backend.substr(5), config);
  }
  return std::make_unique<OpenAiGenerator>(config);
}

std::unique_ptr<Embedder> make_embedder(const ProviderConfig& config) {
  config.validate();
  if (config.backend == "stub:hash") {
    return std::make_unique<HashEmbedder>(config.options.value("dimension", std::size_t{256}),
                                          config.options.value("seed", std::uint64_t{0}));
  }
  if (config.backend == "http:openai") return std::make_unique<OpenAiEmbedder>(config);
  throw ConfigError("provider '" + config.id + "': backend '" + config.backend + "' cannot embed");
}

}  // namespace icsim::providers
