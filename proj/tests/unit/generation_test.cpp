#include <gtest/gtest.h>

#include <cmath>
#include <mutex>
#include <random>

#include <nlohmann/json.hpp>

#include "icsim/bleu.hpp"
#include "icsim/error.hpp"
#include "icsim/genrunner.hpp"
#include "icsim/io.hpp"
#include "icsim/stub_providers.hpp"
#include "reference_values.hpp"

namespace icsim::gen {
namespace {

const std::filesystem::path kFixtures = ICSIM_FIXTURES_DIR;

TEST(Bleu, IdentityEmptyAndBounds) {
  EXPECT_DOUBLE_EQ(bleu("The bell rang twice in the fog.", "The bell rang twice in the fog."), 1.0);
  EXPECT_EQ(bleu("", "reference text"), 0.0);
  EXPECT_EQ(bleu("candidate", ""), 0.0);
  const double b = bleu("a lamp in the window", "the lamp in the window burned");
  EXPECT_GT(b, 0.0);
  EXPECT_LT(b, 1.0);
}

TEST(Bleu, HandComputedValues) {
  // Unigram..trigram precisions are 1, there are no 4-grams (epsilon), and
  // c=3 < r=6 gives a brevity penalty of exp(1 - 2).
  EXPECT_NEAR(bleu("the cat sat", "the cat sat on the mat"), std::exp(-1.0) * std::pow(1e-9, 0.25), 1e-12);
  // All precisions 1, c=5, r=6.
  EXPECT_NEAR(bleu("a b c d e", "a b c d e f"), std::exp(1.0 - 6.0 / 5.0), 1e-12);
  // Longer candidate: no brevity penalty. Clipped unigram 2/4, bigram 1/3, trigram 0 -> eps, 4-gram 0 -> eps.
  EXPECT_NEAR(bleu("x y z w", "x y"), std::pow(0.5 * (1.0 / 3.0) * 1e-9 * 1e-9, 0.25), 1e-15);
}

TEST(Bleu, MatchesOracleFixtures) {
  const auto pairs = nlohmann::json::parse(io::read_file(kFixtures / "bleu_pairs.json"));
  const auto expected = nlohmann::json::parse(io::read_file(kFixtures / "bleu_expected.json"));
  for (const auto& p : pairs) {
    const std::string name = p["name"];
    EXPECT_NEAR(bleu(p["candidate"].get<std::string>(), p["reference"].get<std::string>()),
                expected[name].get<double>(), 1e-9)
        << name;
  }
}

TEST(Bleu, CaseSensitiveAndUnsmoothed) {
  EXPECT_LT(bleu("THE BELL RANG", "the bell rang"), 1e-6);
  BleuOptions o;
  o.smoothing = false;
  EXPECT_EQ(bleu("the cat sat", "the cat sat on the mat", o), 0.0);
  o.max_order = 0;
  EXPECT_THROW(bleu("a", "a", o), InvalidArgument);
}

// Texts shorter than max_order have no 4-grams and take the epsilon, so the
// property holds from four tokens up.
TEST(Bleu, RandomTextsMatchThemselves) {
  std::mt19937_64 rng(42);
  const std::vector<std::string> vocab = {"lamp", "ledger", "tide", "Nell", ",", ".", "signal", "salt", "the"};
  for (int t = 0; t < 50; ++t) {
    std::string s;
    const int n = 4 + static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) s += vocab[rng() % vocab.size()] + " ";
    EXPECT_DOUBLE_EQ(bleu(s, s), 1.0) << s;
  }
}

TEST(OutputCheck, FlagsEmptyMarkupAndNonText) {
  EXPECT_TRUE(validate_output("She closed the ledger and blew out the lamp.").wellformed);
  EXPECT_EQ(validate_output("").reason, "empty");
  EXPECT_EQ(validate_output("   \n").reason, "empty");
  EXPECT_FALSE(validate_output("<|im_end|> ### [INST] {{}} <|im_end|>").wellformed);
  EXPECT_FALSE(validate_output("12345 67890 ... 111 !!!").wellformed);
}

TEST(Budget, WindowMinusPromptWithFloor) {
  EXPECT_EQ(output_budget(8192, 1000), 7192u);
  EXPECT_EQ(output_budget(8192, 8192), 1u);
  EXPECT_EQ(output_budget(8192, 9000), 1u);
}

TEST(Continuation, JsonRoundTrip) {
  Continuation c{"n", "m", ConditionId::kConceptLinguistic, 3, "text", 0.25, true, "", 100, false};
  const auto back = Continuation::from_json(c.to_json());
  EXPECT_EQ(back.novel_id, "n");
  EXPECT_EQ(back.condition, ConditionId::kConceptLinguistic);
  EXPECT_EQ(back.sample, 3);
  EXPECT_EQ(back.bleu, 0.25);
  EXPECT_FALSE(c.to_json().contains("text"));
}

class Generation : public ::testing::Test {
 protected:
  ModelSpec small{"small", "p", 64, {}};
  ModelSpec large{"large", "p", 8192, {}};
};

TEST_F(Generation, OrderedDeterministicAndSeeded) {
  providers::FunctionGenerator gen([](const providers::CompletionRequest& r) {
    return "The lamp is lit for seed " + std::to_string(*r.seed % 1000) + " tonight.";
  });
  std::vector<GenerationTask> tasks = {
      {"n1", &large, ConditionId::kBase, "prompt one", "The lamp is lit tonight."},
      {"n2", &large, ConditionId::kPersona, "prompt two", "The lamp is lit tonight."},
  };
  GenerationOptions o;
  o.samples = 5;
  o.workers = 4;
  o.seed = 9;
  std::mutex mu;
  std::size_t callbacks = 0;
  o.on_sample = [&](const Continuation&) {
    std::lock_guard lock(mu);
    ++callbacks;
  };
  const auto a = run_generation(tasks, {{"large", &gen}}, o);
  const auto b = run_generation(tasks, {{"large", &gen}}, o);
  ASSERT_EQ(a.size(), 10u);
  EXPECT_EQ(callbacks, 20u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].novel_id, i < 5 ? "n1" : "n2");
    EXPECT_EQ(a[i].sample, static_cast<int>(i % 5));
    EXPECT_EQ(a[i].text, b[i].text);
    EXPECT_EQ(a[i].bleu, b[i].bleu);
    EXPECT_TRUE(a[i].wellformed);
  }
  EXPECT_NE(a[0].text, a[1].text);
  EXPECT_EQ(sample_seed(9, "large", "n1", ConditionId::kBase, 0), sample_seed(9, "large", "n1", ConditionId::kBase, 0));
  EXPECT_NE(sample_seed(9, "large", "n1", ConditionId::kBase, 0), sample_seed(9, "small", "n1", ConditionId::kBase, 0));
}

TEST_F(Generation, ProviderFailuresBecomeMalformedSamples) {
  providers::FunctionGenerator boom([](const providers::CompletionRequest&) -> std::string {
    throw ProviderError(ProviderErrorKind::kTimeout, "timed out");
  });
  std::vector<GenerationTask> tasks = {{"n1", &large, ConditionId::kBase, "prompt", "ref"}};
  GenerationOptions o;
  o.samples = 2;
  const auto out = run_generation(tasks, {{"large", &boom}}, o);
  ASSERT_EQ(out.size(), 2u);
  for (const auto& c : out) {
    EXPECT_FALSE(c.wellformed);
    EXPECT_EQ(c.text, "");
    EXPECT_EQ(c.bleu, 0.0);
    EXPECT_EQ(c.reason.rfind("provider: ", 0), 0u);
  }
}

TEST_F(Generation, BudgetFloorsWhenPromptFillsWindow) {
  std::size_t seen_budget = 0;
  providers::FunctionGenerator gen([&](const providers::CompletionRequest& r) {
    seen_budget = r.max_output_tokens;
    return std::string("Fine words here.");
  });
  std::string prompt;
  for (int i = 0; i < 100; ++i) prompt += "word ";
  GenerationOptions o;
  o.samples = 1;
  o.workers = 1;
  const auto out = run_generation({{"n", &small, ConditionId::kBase, prompt, "ref"}}, {{"small", &gen}}, o);
  EXPECT_EQ(seen_budget, 1u);
  EXPECT_TRUE(out[0].budget_floored);
  EXPECT_THROW(run_generation({{"n", &small, ConditionId::kBase, prompt, "ref"}}, {}, o), InvalidArgument);
}

TEST(Stats, MalformedCountAsZero) {
  std::vector<Continuation> cs = {
      {"n", "m", ConditionId::kBase, 0, "", 0.4, true, "", 1, false},
      {"n", "m", ConditionId::kBase, 1, "", 0.2, true, "", 1, false},
      {"n", "m", ConditionId::kBase, 2, "", 0.9, false, "markup density", 1, false},
      {"n", "q", ConditionId::kBase, 0, "", 0.1, true, "", 1, false},
  };
  const auto s = compute_bleu_stats(cs);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].model_id, "m");
  EXPECT_EQ(s[0].count, 3u);
  EXPECT_NEAR(s[0].mean, 0.2, 1e-15);
  EXPECT_NEAR(s[0].stddev, std::sqrt((0.04 + 0.0 + 0.04) / 3.0), 1e-15);
  EXPECT_EQ(s[0].max, 0.4);
  EXPECT_EQ(s[0].min, 0.0);
  EXPECT_NEAR(s[0].malformed_rate, 1.0 / 3.0, 1e-15);
}

TEST(Pretest, ReferenceReplayExcludesOnlyTheWeakestModel) {
  std::vector<BleuStats> stats;
  for (const auto& r : testing::kReferenceBleu) {
    stats.push_back({std::string(r.model), 550, r.mean, r.stddev, r.min, r.max, (550.0 - r.responses) / 550.0});
  }
  const auto report = pretest_filter(stats);
  ASSERT_EQ(report.excluded.size(), 1u);
  EXPECT_EQ(report.excluded[0].model_id, "Gemma-2B");
  EXPECT_EQ(report.retained.size(), 7u);
  EXPECT_NE(std::find(report.retained.begin(), report.retained.end(), "Gemini-Pro-1.5"), report.retained.end());
  const std::string csv = report.to_csv();
  EXPECT_NE(csv.find("Gemma-2B,0.0000,0.0001,0.0007,0.0000,550,0.0182,excluded,mean BLEU below floor"),
            std::string::npos);
}

TEST(Pretest, MaxFloorAloneWouldKeepEveryModel) {
  // Without the mean floor, the weakest model's max (0.0007) clears 1e-4.
  std::vector<BleuStats> stats;
  for (const auto& r : testing::kReferenceBleu) stats.push_back({std::string(r.model), 550, r.mean, r.stddev, r.min, r.max, 0.0});
  const auto report = pretest_filter(stats, {0.10, 1e-4, 0.0});
  EXPECT_TRUE(report.excluded.empty());
}

TEST(Pretest, MalformedRateAndAllExcluded) {
  std::vector<BleuStats> stats = {{"junk", 10, 0.01, 0, 0, 0.02, 0.5}, {"ok", 10, 0.01, 0, 0, 0.02, 0.0}};
  const auto r = pretest_filter(stats);
  EXPECT_EQ(r.retained, (std::vector<std::string>{"ok"}));
  stats.pop_back();
  EXPECT_THROW(pretest_filter(stats), ConfigError);
  EXPECT_THROW(pretest_filter({}), ConfigError);
}

TEST(Candidates, ArgmaxWithLowestSampleOnTiesAndGaps) {
  std::vector<Continuation> cs = {
      {"n", "m", ConditionId::kBase, 0, "a", 0.3, true, "", 1, false},
      {"n", "m", ConditionId::kBase, 1, "b", 0.5, true, "", 1, false},
      {"n", "m", ConditionId::kBase, 2, "c", 0.5, true, "", 1, false},
      {"n", "m", ConditionId::kBase, 3, "d", 0.9, false, "empty", 1, false},
      {"n", "m", ConditionId::kPersona, 0, "", 0.0, false, "empty", 1, false},
      {"n", "dropped", ConditionId::kBase, 0, "e", 1.0, true, "", 1, false},
  };
  const auto set = select_candidates(cs, {"m"});
  ASSERT_EQ(set.chosen.size(), 1u);
  EXPECT_EQ(set.chosen[0].sample, 1);
  ASSERT_EQ(set.gaps.size(), 1u);
  EXPECT_EQ(set.gaps[0].condition, ConditionId::kPersona);
  EXPECT_NE(set.find({"n", "m", ConditionId::kBase}), nullptr);
  EXPECT_EQ(set.find({"n", "dropped", ConditionId::kBase}), nullptr);
}

}  // namespace
}  // namespace icsim::gen
