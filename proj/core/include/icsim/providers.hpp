#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace icsim::providers {

struct CompletionRequest {
  std::string prompt;
  std::size_t max_output_tokens = 1;
  double temperature = 0.8;
  std::optional<std::uint64_t> seed;
};

// Throws ProviderError(kPrecondition) for an empty prompt, a zero output
// budget, or a negative temperature.
void validate(const CompletionRequest& request);

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dimension() const { return values.size(); }
};

// Cosine in [-1, 1]; 0 when either vector has zero norm. Dimensions must match.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

struct ProviderConfig {
  std::string id;
  // "stub:<variant>" or "http:openai" (OpenAI-compatible REST).
  std::string backend;
  std::string endpoint;
  std::string model;
  // Name of the environment variable holding the API key. Never the key itself.
  std::string credential_env;
  std::chrono::milliseconds timeout{60000};
  int retries = 2;
  std::chrono::milliseconds retry_backoff{250};
  int max_in_flight = 4;
  // Requests per second; 0 disables the token bucket.
  double rate_per_second = 0.0;
  // Backend-specific knobs (stub dimension, scripted responses, ...).
  nlohmann::json options = nlohmann::json::object();

  void validate() const;
  nlohmann::json to_json() const;
  static ProviderConfig from_json(const nlohmann::json& j);
};

// Enforces the in-flight limit and an optional token-bucket rate inside a
// provider. acquire() blocks; the returned ticket releases its slot on
// destruction.
class RequestGate {
 public:
  class Ticket {
   public:
    explicit Ticket(RequestGate* gate) : gate_(gate) {}
    Ticket(Ticket&& other) noexcept : gate_(std::exchange(other.gate_, nullptr)) {}
    Ticket(const Ticket&) = delete;
    Ticket& operator=(const Ticket&) = delete;
    Ticket& operator=(Ticket&&) = delete;
    ~Ticket();

   private:
    RequestGate* gate_;
  };

  RequestGate(int max_in_flight, double rate_per_second);
  Ticket acquire();
  int in_flight() const;
  int peak_in_flight() const;

 private:
  void release();

  const int max_in_flight_;
  const double rate_;
  const double burst_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
  int peak_ = 0;
  double tokens_;
  std::chrono::steady_clock::time_point last_refill_;
};

class TextGenerator {
 public:
  virtual ~TextGenerator() = default;
  // Must be safe to call concurrently.
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual std::string backend() const = 0;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(std::string_view text) = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::string backend() const = 0;
};

std::unique_ptr<TextGenerator> make_generator(const ProviderConfig& config);
std::unique_ptr<Embedder> make_embedder(const ProviderConfig& config);

}  // namespace icsim::providers
