#pragma once

#include <atomic>
#include <functional>
#include <string>
#include <vector>

#include "icsim/providers.hpp"

namespace icsim::providers {

// Offline backends selected with `stub:<variant>`. Every stub is a pure
// function of (variant, seed, input); none touches the network.
//
//   echo       reshuffles story sentences of the prompt into a continuation
//   lorem      lorem-ipsum sentences, never more words than the output budget
//   empty      always ""
//   garbage    markup debris resembling a degenerate small model
//   judge      answers the style-judging prompt with a JSON verdict derived
//              from function-word profiles of the two input texts
//   extractor  answers the event-extraction prompt with heuristic events
//   scripted   replays options.responses in order (cycling)
class StubGenerator final : public TextGenerator {
 public:
  StubGenerator(std::string variant, const ProviderConfig& config);
  std::string complete(const CompletionRequest& request) override;
  std::string backend() const override { return "stub:" + variant_; }

 private:
  std::string variant_;
  std::vector<std::string> scripted_;
  std::atomic<std::size_t> cursor_{0};
  RequestGate gate_;
};

// Test helper: delegates to a callable.
class FunctionGenerator final : public TextGenerator {
 public:
  using Fn = std::function<std::string(const CompletionRequest&)>;
  explicit FunctionGenerator(Fn fn) : fn_(std::move(fn)) {}
  std::string complete(const CompletionRequest& request) override {
    validate(request);
    return fn_(request);
  }
  std::string backend() const override { return "function"; }

 private:
  Fn fn_;
};

// Seeded feature hashing of lowercased word tokens into `dimension` buckets,
// L2-normalized. Each token hashes to one bucket with sign +1, so texts with
// disjoint vocabularies land on disjoint buckets (up to hash collisions).
class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dimension = 256, std::uint64_t seed = 0);
  EmbeddingVector embed(std::string_view text) override;
  std::size_t dimension() const override { return dimension_; }
  std::string backend() const override { return "stub:hash"; }

  std::size_t bucket(std::string_view token) const;

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

// Heuristic event extraction used by the extractor stub: one event per
// sentence that names at least one capitalized non-stopword, capped at
// `max_events`. Returns the JSON document the extractor would emit.
nlohmann::json heuristic_events(std::string_view passage, std::size_t max_events = 12);

// Function-word profile similarity in [0, 1] used by the judge stub.
double stylistic_affinity(std::string_view a, std::string_view b);

}  // namespace icsim::providers
