#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "icsim/analysis.hpp"
#include "icsim/error.hpp"
#include "icsim/features.hpp"
#include "icsim/io.hpp"

namespace icsim::study {

namespace fs = std::filesystem;
using features::ConditionId;

class NotFound : public Error {
 public:
  using Error::Error;
};

// Duplicate submission, or a submission for an item the rater was never served.
class Conflict : public Error {
 public:
  using Error::Error;
};

// A scored candidate eligible for the study.
struct StudyCandidate {
  std::string novel_id;
  std::string model_id;
  ConditionId condition = ConditionId::kBase;
  double style = 1.0;       // judge score, [1, 5]
  double structural = 0.0;  // [0, 1]
  std::string text;
};

// Style rescaled to [0, 1] with (s - 1) / 4, averaged with the structural score.
double llm_overall(double style, double structural);

struct StudyItem {
  std::string id;
  std::string novel_id;     // novel of the truth passage
  ConditionId condition = ConditionId::kBase;
  std::string model_id;
  std::string candidate_novel_id;
  std::string truth;
  std::string candidate;
  bool attention_check = false;

  nlohmann::json to_json() const;
  static StudyItem from_json(const nlohmann::json& j);
};

struct StudyOptions {
  int attention_checks = 2;
  std::uint64_t seed = 0;
  int exclusion_failures = 1;   // failed checks that exclude a rater
  int attention_pass_max = 2;   // highest q_overall that still passes a check
};

struct StudyDefinition {
  std::vector<StudyItem> items;
  StudyOptions options;

  nlohmann::json to_json() const;
  static StudyDefinition from_json(const nlohmann::json& j);
  const StudyItem* find(const std::string& item_id) const;
};

// One item per (novel, condition): the candidate with the highest llm_overall,
// ties to the smallest model id. Attention checks pair a novel's truth with a
// chosen candidate from a different novel. `truths` maps novel id to text.
StudyDefinition build_study(const std::vector<StudyCandidate>& candidates,
                            const std::map<std::string, std::string>& truths, const StudyOptions& options = {});

enum class Presentation { kTruthFirst, kCandidateFirst };
std::string_view to_string(Presentation p);

struct RatingRecord {
  std::string rater_id;
  std::string item_id;
  int q_style = 0;
  int q_structure = 0;
  int q_overall = 0;
  std::string justification;
  Presentation presentation = Presentation::kTruthFirst;
  std::string timestamp;

  nlohmann::json to_json() const;
  static RatingRecord from_json(const nlohmann::json& j);
};

struct ItemResult {
  std::string item_id;
  std::string novel_id;
  ConditionId condition = ConditionId::kBase;
  std::size_t raters = 0;
  double style = 0.0;
  double structure = 0.0;
  double overall = 0.0;
};

struct StudyResult {
  std::vector<ItemResult> items;  // non-check items with at least one valid rating
  std::map<ConditionId, analysis::HumanScores> conditions;
  std::map<std::string, std::vector<std::string>> excluded;  // rater -> reasons
  std::vector<std::string> gaps;                             // items with no valid rating

  nlohmann::json to_json() const;
};

// Raters with at least options.exclusion_failures failed checks; a check fails
// when q_overall > options.attention_pass_max.
std::map<std::string, std::vector<std::string>> score_attention_checks(const StudyDefinition& study,
                                                                       const std::vector<RatingRecord>& ratings);

// Per item, the mean over non-excluded raters; per condition, the mean and
// population std of those item means across novels.
StudyResult aggregate_study(const StudyDefinition& study, const std::vector<RatingRecord>& ratings);

// Rubric shown to raters (three 1-5 questions plus an optional comment).
nlohmann::json rubric();

// Thread-safe study state. With a non-empty directory the rater and rating
// logs are appended there and replayed on construction.
class StudyService {
 public:
  explicit StudyService(StudyDefinition study, fs::path dir = {});

  // Registers `requested` (or a fresh random token) and returns the rater id.
  // Registering an existing id again is a no-op.
  std::string register_rater(const std::optional<std::string>& requested = std::nullopt);
  bool has_rater(const std::string& rater) const;

  // Seeded per-rater order: a permutation of all items.
  std::vector<std::size_t> item_order(const std::string& rater) const;
  Presentation presentation(const std::string& rater, const std::string& item_id) const;

  // Blinded payload {item_id, passage_a, passage_b, progress}; nullopt once
  // the rater has rated everything. Throws NotFound for an unknown rater.
  std::optional<nlohmann::json> next_item(const std::string& rater);

  // Throws InvalidArgument (scores out of range), NotFound (unknown rater or
  // item), or Conflict (not served to this rater, or already rated).
  RatingRecord submit(RatingRecord record);

  std::vector<RatingRecord> ratings() const;
  StudyResult results() const;
  nlohmann::json metadata() const;
  const StudyDefinition& definition() const { return study_; }

 private:
  struct RaterState {
    std::set<std::string> served;
    std::set<std::string> rated;
  };

  StudyDefinition study_;
  fs::path dir_;
  mutable std::mutex mu_;
  std::map<std::string, RaterState> raters_;
  std::vector<RatingRecord> ratings_;
  std::unique_ptr<io::JsonlAppender> rater_log_;
  std::unique_ptr<io::JsonlAppender> rating_log_;
};

}  // namespace icsim::study
