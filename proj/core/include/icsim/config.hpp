#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "icsim/features.hpp"
#include "icsim/genrunner.hpp"
#include "icsim/providers.hpp"
#include "icsim/structsim.hpp"
#include "icsim/study.hpp"

namespace icsim {

namespace fs = std::filesystem;

struct Thresholds {
  double tau = 0.5;
  double tau_loc = 0.8;
  double coarse_location = 0.5;
  double malformed_rate = 0.10;
  double bleu_floor = 1e-4;
  double bleu_mean_floor = 5e-5;
  double event_overlap = 0.5;
};

struct StudyConfig {
  study::StudyOptions options;
  int port = 8080;
  std::string admin_token;
  std::string static_dir;
};

struct RunConfig {
  // Directory relative paths resolve against (the config file's directory).
  fs::path base_dir;

  std::string manifest = "manifest.ini";
  std::string output_dir = "runs";
  std::string run_id = "default";
  std::string assets_dir = "assets";
  std::string mappings_dir = "mappings";
  std::string aliases_dir = "aliases";
  std::string stopwords;  // optional word list replacing the bundled one
  std::string lexicon;    // optional TSV replacing the bundled lexicon
  std::string chapter_pattern = corpus::IngestOptions{}.chapter_pattern;

  std::vector<providers::ProviderConfig> providers;
  std::vector<gen::ModelSpec> models;
  std::string judge_provider;
  std::string extractor_provider;
  std::string embedder_provider;

  std::vector<features::ConditionId> conditions{features::kAllConditions.begin(), features::kAllConditions.end()};
  int samples = 10;
  double temperature = 0.8;
  std::uint64_t seed = 0;
  int workers = 4;

  Thresholds thresholds;
  structsim::EventWeights event_weights;
  structsim::StructuralParams structure;
  features::ProfileOptions linguistic;
  std::size_t concept_pairs = 0;
  gen::BleuOptions bleu;
  int judge_retries = 2;
  double judge_temperature = 0.0;
  std::size_t ttr_window = 500;
  std::size_t sentence_bin = 5;
  StudyConfig human_study;

  // Unknown keys are errors. Missing keys keep their defaults.
  static RunConfig from_json(const nlohmann::json& j, const fs::path& base_dir = {});
  static RunConfig load(const fs::path& path);
  nlohmann::json to_json() const;
  // Throws ConfigError on invalid weights, thresholds, or references.
  void validate() const;
  // Stable digest of every setting except run_id and base_dir.
  std::string hash() const;

  fs::path resolve(const std::string& p) const;
  fs::path run_dir() const { return resolve(output_dir) / run_id; }
  const providers::ProviderConfig& provider(const std::string& id) const;

  bool operator==(const RunConfig& other) const { return to_json() == other.to_json(); }
};

}  // namespace icsim
