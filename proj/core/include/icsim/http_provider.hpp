#pragma once

#include <atomic>
#include <string>

#include "icsim/providers.hpp"

namespace icsim::providers {

// OpenAI-compatible chat-completions backend (`http:openai`). Transport
// failures, 408, 429 and 5xx are retried with linear backoff up to the retry
// budget; 401/403 fail immediately as authentication errors.
class OpenAiGenerator final : public TextGenerator {
 public:
  explicit OpenAiGenerator(ProviderConfig config);
  std::string complete(const CompletionRequest& request) override;
  std::string backend() const override { return config_.backend; }

 private:
  ProviderConfig config_;
  RequestGate gate_;
};

// OpenAI-compatible embeddings backend. The first response fixes the dimension.
class OpenAiEmbedder final : public Embedder {
 public:
  explicit OpenAiEmbedder(ProviderConfig config);
  EmbeddingVector embed(std::string_view text) override;
  std::size_t dimension() const override { return dimension_.load(); }
  std::string backend() const override { return config_.backend; }

 private:
  ProviderConfig config_;
  RequestGate gate_;
  std::atomic<std::size_t> dimension_{0};
};

}  // namespace icsim::providers
