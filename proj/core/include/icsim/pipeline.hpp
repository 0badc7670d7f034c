#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "icsim/config.hpp"

namespace icsim::pipeline {

namespace fs = std::filesystem;

enum class Stage { kIngest, kProfile, kPrompts, kGenerate, kPretest, kStructsim, kJudge, kStudy, kReport };

// Execution order of `icsim all`.
inline constexpr std::array<Stage, 9> kAllStages = {Stage::kIngest,   Stage::kProfile,  Stage::kPrompts,
                                                    Stage::kGenerate, Stage::kPretest,  Stage::kStructsim,
                                                    Stage::kJudge,    Stage::kStudy,    Stage::kReport};

std::string_view to_string(Stage stage);
std::optional<Stage> parse_stage(std::string_view name);

// Runs fn(0..n-1) on up to `workers` threads. The first exception thrown is
// rethrown after every worker has stopped.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

// Run directory layout (relative to RunConfig::run_dir()):
//   config.json
//   segments/<novel>.context.txt, <novel>.truth.txt, stats.jsonl
//   profiles/<novel>.json
//   prompts/<novel>/<condition>.txt, prompts/index.jsonl
//   continuations/<model>/<novel>/<condition>/<i>.txt, continuations.jsonl
//   pretest.csv, pretest.json, candidates.jsonl, gaps.jsonl
//   events/<novel>.truth.json, events/<novel>/<model>/<condition>.json
//   structural.jsonl, structural.csv, structural_meta.json
//   style.jsonl, style_summary.csv
//   study/study.json (plus raters.jsonl, ratings.jsonl written by `serve`)
//   report/
//
// Each stage rewrites its own outputs and reads only earlier stages' files,
// throwing MissingArtifact when one is absent.
class Pipeline {
 public:
  explicit Pipeline(RunConfig config);

  void run(Stage stage);
  void run_all();
  // Blocks serving the study of this run. `port` overrides the config.
  void serve(std::optional<int> port = std::nullopt);

  const RunConfig& config() const { return config_; }
  fs::path run_dir() const { return config_.run_dir(); }

  void ingest();
  void profile();
  void prompts();
  void generate();
  void pretest();
  void structsim();
  void judge();
  void study();
  void report();

 private:
  RunConfig config_;
};

}  // namespace icsim::pipeline
