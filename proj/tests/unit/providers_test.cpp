#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "icsim/error.hpp"
#include "icsim/http_provider.hpp"
#include "icsim/providers.hpp"
#include "icsim/stub_providers.hpp"
#include "icsim/text.hpp"

namespace icsim::providers {
namespace {

ProviderConfig stub(const std::string& variant) {
  ProviderConfig c;
  c.id = variant;
  c.backend = "stub:" + variant;
  return c;
}

const std::string kPrompt =
    "You are continuing a novel. Here is the story so far:\n"
    "The tide came in over the shingle before dawn. Rosa counted the gulls on the breakwater twice. "
    "Her father had left the signal lamp unlit for the third night running. Nobody in the village "
    "asked him why the lamp stayed dark.\nContinue the story.";

TEST(Stub, DeterministicForSameSeed) {
  for (const std::string v : {"echo", "lorem", "garbage"}) {
    auto g = make_generator(stub(v));
    CompletionRequest r{kPrompt, 200, 0.8, 7};
    EXPECT_EQ(g->complete(r), g->complete(r)) << v;
    auto g2 = make_generator(stub(v));
    EXPECT_EQ(g->complete(r), g2->complete(r)) << v;
  }
}

TEST(Stub, PreconditionErrors) {
  auto g = make_generator(stub("echo"));
  try {
    g->complete({kPrompt, 0, 0.8, 1});
    FAIL() << "expected a precondition error";
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderErrorKind::kPrecondition);
  }
  EXPECT_THROW(g->complete({"", 10, 0.8, 1}), ProviderError);
  EXPECT_THROW(g->complete({kPrompt, 10, -0.1, 1}), ProviderError);
}

TEST(Stub, LoremRespectsBudgetAndGolden) {
  auto g = make_generator(stub("lorem"));
  for (std::size_t budget : {1, 5, 17, 64, 300}) {
    const auto out = g->complete({kPrompt, budget, 0.8, 3});
    EXPECT_LE(text::count_words(out), budget) << budget;
  }
  // Lorem fills the whole budget.
  EXPECT_EQ(text::count_words(g->complete({kPrompt, 64, 0.8, 3})), 64u);
}

TEST(Stub, EchoDropsPromptScaffolding) {
  auto g = make_generator(stub("echo"));
  const auto out = g->complete({kPrompt, 500, 0.8, 11});
  EXPECT_FALSE(out.empty());
  EXPECT_EQ(out.find("novel"), std::string::npos);
  EXPECT_EQ(out.find("Continue"), std::string::npos);
}

TEST(Stub, EmptyAndScripted) {
  EXPECT_EQ(make_generator(stub("empty"))->complete({kPrompt, 10, 0.8, 1}), "");
  auto c = stub("scripted");
  c.options = {{"responses", {"one", "two"}}};
  auto g = make_generator(c);
  EXPECT_EQ(g->complete({kPrompt, 10, 0.8, 1}), "one");
  EXPECT_EQ(g->complete({kPrompt, 10, 0.8, 1}), "two");
  EXPECT_EQ(g->complete({kPrompt, 10, 0.8, 1}), "one");
  EXPECT_THROW(make_generator(stub("scripted")), ConfigError);
}

TEST(Embedding, HashEmbedderProperties) {
  HashEmbedder e(256, 5);
  const auto a = e.embed("lanterns over the harbour");
  EXPECT_EQ(a.values, e.embed("lanterns over the harbour").values);
  EXPECT_NEAR(cosine(a, a), 1.0, 1e-9);
  for (double x : a.values) EXPECT_TRUE(std::isfinite(x));
}

TEST(Embedding, DisjointVocabulariesAreOrthogonal) {
  HashEmbedder e(256, 0);
  // Pick words that land in distinct buckets so the supports are disjoint.
  const std::string a = "anchor";
  std::string b;
  for (const std::string w : {"velvet", "orchard", "thimble", "quarry", "saddle"}) {
    if (e.bucket(w) != e.bucket(a)) {
      b = w;
      break;
    }
  }
  ASSERT_FALSE(b.empty());
  const auto va = e.embed(a);
  const auto vb = e.embed(b);
  double dot = 0.0;
  for (std::size_t i = 0; i < va.values.size(); ++i) dot += va.values[i] * vb.values[i];
  EXPECT_EQ(dot, 0.0);
  EXPECT_EQ(cosine(va, vb), 0.0);
}

TEST(Embedding, CosineEdgeCases) {
  EmbeddingVector zero{{0.0, 0.0}};
  EmbeddingVector x{{1.0, 0.0}};
  EmbeddingVector neg{{-1.0, 0.0}};
  EXPECT_EQ(cosine(zero, x), 0.0);
  EXPECT_DOUBLE_EQ(cosine(x, neg), -1.0);
  EXPECT_THROW(cosine(x, EmbeddingVector{{1.0}}), InvalidArgument);
}

TEST(Config, ValidationAndRoundTrip) {
  ProviderConfig c = stub("echo");
  c.retries = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c.retries = 3;
  c.max_in_flight = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.max_in_flight = 2;
  EXPECT_NO_THROW(c.validate());
  const auto back = ProviderConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());

  ProviderConfig h;
  h.id = "remote";
  h.backend = "http:openai";
  EXPECT_THROW(h.validate(), ConfigError);
  h.backend = "grpc:thing";
  EXPECT_THROW(h.validate(), ConfigError);
}

TEST(Gate, BoundsInFlightRequests) {
  RequestGate gate(2, 0.0);
  std::atomic<int> running{0};
  std::vector<std::thread> pool;
  for (int i = 0; i < 8; ++i) {
    pool.emplace_back([&] {
      auto t = gate.acquire();
      ++running;
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      --running;
    });
  }
  for (auto& t : pool) t.join();
  EXPECT_LE(gate.peak_in_flight(), 2);
  EXPECT_GE(gate.peak_in_flight(), 1);
  EXPECT_EQ(gate.in_flight(), 0);
}

// Minimal OpenAI-compatible server on a random local port.
class FakeOpenAi : public ::testing::Test {
 protected:
  void SetUp() override {
    ::setenv("ICSIM_TEST_KEY", "sekrit", 1);
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++calls_;
      const auto body = nlohmann::json::parse(req.body);
      last_auth_ = req.get_header_value("Authorization");
      if (mode_ == "flaky" && calls_ < 3) {
        res.status = 503;
        return;
      }
      if (mode_ == "down") {
        res.status = 500;
        return;
      }
      if (mode_ == "auth") {
        res.status = 401;
        return;
      }
      if (mode_ == "schema") {
        res.set_content(R"({"unexpected": true})", "application/json");
        return;
      }
      const std::string reply = "echo:" + body["model"].get<std::string>() + ":" +
                                std::to_string(body["max_tokens"].get<int>());
      res.set_content(nlohmann::json{{"choices", {{{"message", {{"content", reply}}}}}}}.dump(), "application/json");
    });
    server_.Post("/v1/embeddings", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"data": [{"embedding": [0.6, 0.8]}]})", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  ProviderConfig config() const {
    ProviderConfig c;
    c.id = "fake";
    c.backend = "http:openai";
    c.endpoint = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    c.model = "tiny";
    c.credential_env = "ICSIM_TEST_KEY";
    c.retries = 2;
    c.retry_backoff = std::chrono::milliseconds(1);
    c.timeout = std::chrono::milliseconds(2000);
    return c;
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::string mode_ = "ok";
  std::atomic<int> calls_{0};
  std::string last_auth_;
};

TEST_F(FakeOpenAi, CompletesAndSendsCredential) {
  OpenAiGenerator g(config());
  EXPECT_EQ(g.complete({"hello", 42, 0.8, 1}), "echo:tiny:42");
  EXPECT_EQ(last_auth_, "Bearer sekrit");
}

TEST_F(FakeOpenAi, RetriesTransientFailures) {
  mode_ = "flaky";
  OpenAiGenerator g(config());
  EXPECT_EQ(g.complete({"hello", 5, 0.8, 1}), "echo:tiny:5");
  EXPECT_EQ(calls_.load(), 3);
}

TEST_F(FakeOpenAi, ExhaustsRetryBudget) {
  mode_ = "down";
  OpenAiGenerator g(config());
  try {
    g.complete({"hello", 5, 0.8, 1});
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderErrorKind::kExhausted);
  }
  EXPECT_EQ(calls_.load(), 3);
}

TEST_F(FakeOpenAi, AuthenticationFailsFast) {
  mode_ = "auth";
  OpenAiGenerator g(config());
  try {
    g.complete({"hello", 5, 0.8, 1});
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderErrorKind::kAuthentication);
  }
  EXPECT_EQ(calls_.load(), 1);
}

TEST_F(FakeOpenAi, UnexpectedSchemaIsBadResponse) {
  mode_ = "schema";
  OpenAiGenerator g(config());
  try {
    g.complete({"hello", 5, 0.8, 1});
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderErrorKind::kBadResponse);
  }
}

TEST_F(FakeOpenAi, Embeddings) {
  OpenAiEmbedder e(config());
  const auto v = e.embed("anything");
  EXPECT_EQ(v.values, (std::vector<double>{0.6, 0.8}));
  EXPECT_EQ(e.dimension(), 2u);
}

TEST(Http, UnreachableEndpointTimesOutOrExhausts) {
  ProviderConfig c;
  c.id = "nowhere";
  c.backend = "http:openai";
  c.endpoint = "http://127.0.0.1:1/v1";
  c.retries = 1;
  c.retry_backoff = std::chrono::milliseconds(1);
  c.timeout = std::chrono::milliseconds(200);
  OpenAiGenerator g(c);
  EXPECT_THROW(g.complete({"hello", 5, 0.8, 1}), ProviderError);
}

}  // namespace
}  // namespace icsim::providers
