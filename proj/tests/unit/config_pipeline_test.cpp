#include <gtest/gtest.h>

#include <fstream>

#include <spdlog/spdlog.h>

#include "icsim/config.hpp"
#include "icsim/error.hpp"
#include "icsim/io.hpp"
#include "icsim/pipeline.hpp"
#include "test_support.hpp"

namespace icsim {
namespace {

const fs::path kCorpus = ICSIM_CORPUS_DIR;

nlohmann::json stub_config() { return nlohmann::json::parse(io::read_file(kCorpus / "icsim.json")); }

TEST(Config, LoadsBundledStubConfig) {
  const auto c = RunConfig::load(kCorpus / "icsim.json");
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.models.size(), 2u);
  EXPECT_EQ(c.conditions.size(), 11u);
  EXPECT_EQ(c.samples, 3);
  EXPECT_EQ(c.resolve("manifest.ini"), kCorpus / "manifest.ini");
  EXPECT_EQ(c.provider("hash").backend, "stub:hash");
  EXPECT_THROW(c.provider("nope"), ConfigError);
}

TEST(Config, DefaultsMatchTheMethod) {
  RunConfig c;
  EXPECT_EQ(c.samples, 10);
  EXPECT_EQ(c.temperature, 0.8);
  EXPECT_EQ(c.thresholds.tau, 0.5);
  EXPECT_EQ(c.thresholds.tau_loc, 0.8);
  EXPECT_EQ(c.event_weights.characters, 0.35);
  EXPECT_EQ(c.structure.alpha, 0.6);
  EXPECT_EQ(c.judge_temperature, 0.0);
}

TEST(Config, JsonRoundTripAndHash) {
  const auto c = RunConfig::from_json(stub_config(), kCorpus);
  const auto back = RunConfig::from_json(c.to_json(), kCorpus);
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.hash(), c.hash());
  auto renamed = stub_config();
  renamed["run_id"] = "other";
  EXPECT_EQ(RunConfig::from_json(renamed, kCorpus).hash(), c.hash());
  auto changed = stub_config();
  changed["samples"] = 4;
  EXPECT_NE(RunConfig::from_json(changed, kCorpus).hash(), c.hash());
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  auto j = stub_config();
  j["sampels"] = 3;
  EXPECT_THROW(RunConfig::from_json(j), ConfigError);

  j = stub_config();
  j["weights"] = {{"event", {{"characters", 0.5}, {"location", 0.15}, {"semantic", 0.5}}}};
  EXPECT_THROW(RunConfig::from_json(j).validate(), ConfigError);

  j = stub_config();
  j["weights"] = {{"structure", {{"alpha", 0.5}, {"beta", 0.2}, {"gamma", 0.2}}}};
  EXPECT_THROW(RunConfig::from_json(j).validate(), ConfigError);

  j = stub_config();
  j["thresholds"] = {{"tau", 1.5}};
  EXPECT_THROW(RunConfig::from_json(j).validate(), ConfigError);

  j = stub_config();
  j["models"][0]["provider"] = "missing";
  EXPECT_THROW(RunConfig::from_json(j).validate(), ConfigError);

  j = stub_config();
  j["run_id"] = "../escape";
  EXPECT_THROW(RunConfig::from_json(j).validate(), ConfigError);

  j = stub_config();
  j["conditions"] = {"nonsense"};
  EXPECT_THROW(RunConfig::from_json(j), ConfigError);

  j = stub_config();
  j["samples"] = "ten";
  EXPECT_THROW(RunConfig::from_json(j), ConfigError);
}

TEST(Stages, NamesRoundTrip) {
  for (auto s : pipeline::kAllStages) EXPECT_EQ(pipeline::parse_stage(pipeline::to_string(s)), s);
  EXPECT_FALSE(pipeline::parse_stage("bogus").has_value());
}

TEST(Stages, ParallelForRunsEverythingAndRethrows) {
  std::vector<int> hits(100, 0);
  pipeline::parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  EXPECT_EQ(std::count(hits.begin(), hits.end(), 1), 100);
  EXPECT_THROW(pipeline::parallel_for(10, 3,
                                      [](std::size_t i) {
                                        if (i == 7) throw InvalidArgument("seven");
                                      }),
               InvalidArgument);
}

class PipelineRun : public ::testing::Test {
 protected:
  void SetUp() override { spdlog::set_level(spdlog::level::warn); }
  void TearDown() override { spdlog::set_level(spdlog::level::info); }

  RunConfig config(const std::string& run_id) {
    auto j = stub_config();
    j["output_dir"] = dir.path().string();
    j["run_id"] = run_id;
    j["samples"] = 2;
    return RunConfig::from_json(j, kCorpus);
  }

  testing::TempDir dir{"icsim-pipeline"};
};

TEST_F(PipelineRun, StagesNeedTheirInputs) {
  pipeline::Pipeline p(config("fresh"));
  EXPECT_THROW(p.run(pipeline::Stage::kStructsim), MissingArtifact);
  EXPECT_THROW(p.run(pipeline::Stage::kProfile), MissingArtifact);
  EXPECT_THROW(p.run(pipeline::Stage::kReport), MissingArtifact);
}

TEST_F(PipelineRun, FullRunIsReproducible) {
  pipeline::Pipeline a(config("a"));
  a.run_all();
  const fs::path report = a.run_dir() / "report";
  for (const char* name : {"combined.csv", "models.csv", "linguistic_analysis.csv", "summary.md"}) {
    ASSERT_TRUE(fs::exists(report / name)) << name;
  }
  const std::string combined = io::read_file(report / "combined.csv");
  EXPECT_EQ(std::count(combined.begin(), combined.end(), '\n'), 12);

  // Rerunning only the report stage rewrites identical bytes.
  a.run(pipeline::Stage::kReport);
  EXPECT_EQ(io::read_file(report / "combined.csv"), combined);

  pipeline::Pipeline b(config("b"));
  b.run_all();
  for (const auto& entry : fs::directory_iterator(report)) {
    EXPECT_EQ(io::read_file(entry.path()), io::read_file(b.run_dir() / "report" / entry.path().filename()))
        << entry.path().filename();
  }
  EXPECT_TRUE(fs::exists(a.run_dir() / "study" / "study.json"));
  EXPECT_TRUE(fs::exists(a.run_dir() / "pretest.csv"));
}

}  // namespace
}  // namespace icsim
