#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "icsim/bleu.hpp"
#include "icsim/corpus.hpp"
#include "icsim/features.hpp"
#include "icsim/providers.hpp"

namespace icsim::gen {

using features::ConditionId;

struct ModelSpec {
  std::string id;
  std::string provider;  // ProviderConfig id
  std::size_t context_window = 8192;
  corpus::Date release_date;

  void validate() const;
};

struct Continuation {
  std::string novel_id;
  std::string model_id;
  ConditionId condition = ConditionId::kBase;
  int sample = 0;
  std::string text;
  double bleu = 0.0;
  bool wellformed = false;
  std::string reason;  // why it is malformed, or the provider error
  std::size_t max_output_tokens = 1;
  bool budget_floored = false;  // prompt filled the whole window

  nlohmann::json to_json() const;  // without `text`
  static Continuation from_json(const nlohmann::json& j);
};

// One prompt for one model, sampled n times.
struct GenerationTask {
  std::string novel_id;
  const ModelSpec* model = nullptr;
  ConditionId condition = ConditionId::kBase;
  std::string prompt;
  std::string reference;  // ground truth the samples are scored against
};

struct GenerationOptions {
  int samples = 10;
  double temperature = 0.8;
  std::uint64_t seed = 0;
  int workers = 4;
  BleuOptions bleu;
  OutputCheckOptions output_check;
  // Called from worker threads as samples finish; must be thread-safe.
  std::function<void(const Continuation&)> on_sample;
};

// Output budget for a prompt: window minus prompt tokens, never below 1.
std::size_t output_budget(std::size_t context_window, std::size_t prompt_tokens);

std::uint64_t sample_seed(std::uint64_t base, const std::string& model, const std::string& novel,
                          ConditionId condition, int sample);

// Samples every task `samples` times. Provider failures become empty,
// malformed records; nothing here throws for a single bad sample. The result
// is ordered by task, then sample index, whatever the completion order.
std::vector<Continuation> run_generation(const std::vector<GenerationTask>& tasks,
                                         const std::map<std::string, providers::TextGenerator*>& generators,
                                         const GenerationOptions& options,
                                         const text::Tokenizer& tokenizer = text::default_tokenizer());

struct BleuStats {
  std::string model_id;
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population
  double min = 0.0;
  double max = 0.0;
  double malformed_rate = 0.0;
};

// Per model in first-appearance order. Malformed samples count with BLEU 0.
std::vector<BleuStats> compute_bleu_stats(const std::vector<Continuation>& continuations);

struct PretestThresholds {
  double malformed_rate = 0.10;  // exclude above
  double bleu_floor = 1e-4;      // exclude when max BLEU is below
  double bleu_mean_floor = 5e-5; // exclude when mean BLEU is below
};

struct Exclusion {
  std::string model_id;
  std::vector<std::string> reasons;
};

struct PretestReport {
  std::vector<BleuStats> stats;
  std::vector<std::string> retained;
  std::vector<Exclusion> excluded;

  // Mean,Std,Max,Min per model, four decimals, plus malformed rate and verdict.
  std::string to_csv() const;
};

// Throws ConfigError when every model is excluded.
PretestReport pretest_filter(const std::vector<BleuStats>& stats, const PretestThresholds& thresholds = {});

struct CandidateKey {
  std::string novel_id;
  std::string model_id;
  ConditionId condition = ConditionId::kBase;
  auto operator<=>(const CandidateKey&) const = default;
};

struct CandidateSet {
  std::vector<Continuation> chosen;  // first-appearance order of the triples
  std::vector<CandidateKey> gaps;    // retained triples with no wellformed sample

  const Continuation* find(const CandidateKey& key) const;
};

// Highest-BLEU wellformed sample per (novel, model, condition), lowest sample
// index on ties. Only models listed in `retained` are considered.
CandidateSet select_candidates(const std::vector<Continuation>& continuations,
                               const std::vector<std::string>& retained);

}  // namespace icsim::gen
