#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icsim/features.hpp"
#include "icsim/genrunner.hpp"
#include "icsim/structsim.hpp"
#include "icsim/stylejudge.hpp"

namespace icsim::analysis {

namespace fs = std::filesystem;
using features::ConditionId;

// Competition ranks ("1224"), highest value first.
std::vector<int> competition_ranks(const std::vector<double>& values, bool descending = true);

struct SettingInput {
  std::string name;
  double linguistic_mean = 0.0;
  double structural_mean = 0.0;
};

struct SettingSummary {
  std::string name;
  double linguistic_mean = 0.0;
  double structural_mean = 0.0;
  int linguistic_rank = 0;
  int structural_rank = 0;
  double average_rank = 0.0;
  int overall_rank = 0;
};

// Ranks each column by descending mean, averages the two ranks, and ranks the
// averages ascending. Ties share the better rank. Output keeps input order.
std::vector<SettingSummary> rank_settings(const std::vector<SettingInput>& settings);
// Map form; both maps must hold the same keys.
std::vector<SettingSummary> rank_settings(const std::map<std::string, double>& linguistic,
                                          const std::map<std::string, double>& structural);

// Moving-average type/token ratio over lowercase word tokens; plain TTR when
// the text is shorter than one window. Throws InvalidArgument on no tokens.
double lexical_diversity(std::string_view text, std::size_t window = 500);

double sentiment_delta(std::string_view generated, std::string_view ground_truth,
                       const features::SentimentLexicon& lexicon = features::SentimentLexicon::bundled());

struct SentenceLengthProfile {
  std::vector<std::size_t> lengths;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t bin_width = 5;
  std::vector<std::size_t> histogram;  // bin k counts lengths in [k*w + 1, (k+1)*w]
};

SentenceLengthProfile sentence_length_profile(std::string_view text, std::size_t bin_width = 5);

// Canonical characters with at least one whole-word, case-insensitive alias
// mention. Throws InvalidArgument on an empty alias map.
std::size_t character_overlap(std::string_view generated, const structsim::AliasMap& aliases);

// Ground-truth events whose description matches a distinct generated event
// with semantic similarity >= threshold (greedy, best pairs first).
std::size_t event_overlap(const std::vector<structsim::Event>& generated, const std::vector<structsim::Event>& truth,
                          structsim::EventScorer& scorer, double threshold = 0.5);

// Signed, fixed-decimal delta such as "+0.0017".
std::string signed_delta(double value, int decimals = 4);

// One scored candidate, as assembled from the run logs.
struct CandidateRow {
  std::string novel_id;
  std::string model_id;
  ConditionId condition = ConditionId::kBase;
  std::optional<double> style;
  std::optional<double> structural;
  double lexical_diversity = 0.0;
  double sentiment_delta = 0.0;
  std::vector<std::size_t> sentence_lengths;
  std::size_t character_overlap = 0;
  std::size_t event_overlap = 0;
};

struct TruthRow {
  std::string novel_id;
  double lexical_diversity = 0.0;
  std::vector<std::size_t> sentence_lengths;
};

struct HumanScores {
  judge::ScoreSummary linguistic;
  judge::ScoreSummary structure;
  judge::ScoreSummary overall;
};

struct ReportInput {
  std::vector<ConditionId> conditions;  // row order of the condition table
  std::vector<CandidateRow> rows;
  std::vector<TruthRow> truth;
  std::vector<gen::CandidateKey> gaps;  // triples that produced no scored candidate
  std::map<ConditionId, HumanScores> human;
  std::vector<std::string> notes;
};

struct ReportFiles {
  std::string combined_csv;
  std::string models_csv;
  std::string linguistic_csv;
  std::string sentence_lengths_csv;
  std::string overlap_csv;
  std::string summary_md;
};

// Pure rendering; identical inputs give identical bytes. Throws
// InvalidArgument when no row carries a style or structural score.
ReportFiles render_report(const ReportInput& input);
void write_report(const ReportFiles& files, const fs::path& dir);

}  // namespace icsim::analysis
