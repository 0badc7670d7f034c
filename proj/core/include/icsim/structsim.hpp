#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "icsim/providers.hpp"

namespace icsim::structsim {

namespace fs = std::filesystem;

struct Event {
  std::vector<std::string> characters;
  std::string location;
  std::string description;

  nlohmann::json to_json() const;
  static Event from_json(const nlohmann::json& j);
  bool operator==(const Event&) const = default;
};

// canonical name -> aliases, all lowercase. Each canonical is its own alias and
// no alias belongs to two canonicals.
class AliasMap {
 public:
  AliasMap() = default;
  static AliasMap from_json(const nlohmann::json& j);
  static AliasMap load(const fs::path& path);
  void add(std::string_view canonical, const std::vector<std::string>& aliases);
  // Lowercased, trimmed lookup; unknown names map to that form unchanged.
  std::string canonicalize(std::string_view name) const;
  std::size_t size() const { return canonical_.size(); }
  const std::map<std::string, std::set<std::string>>& entries() const { return canonical_; }

 private:
  std::map<std::string, std::set<std::string>> canonical_;
  std::map<std::string, std::string> alias_to_canonical_;
};

// |A ∩ B| / |A ∪ B|; 0 when both are empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);
// 2|X ∩ Y| / (|X| + |Y|) over lowercase word-token sets; 0 when both are empty.
double dice_tokens(std::string_view a, std::string_view b);
// 1 on case-insensitive equality, `coarse` when dice_tokens >= tau_loc, else 0.
double location_score(std::string_view lg, std::string_view lh, double tau_loc = 0.8, double coarse = 0.5);
// Cosine clamped to [0, 1]; identical vectors score exactly 1.
double clamped_cosine(const providers::EmbeddingVector& a, const providers::EmbeddingVector& b);

struct EventWeights {
  double characters = 0.35;
  double location = 0.15;
  double semantic = 0.50;
};

struct EventParams {
  EventWeights weights;
  double tau_loc = 0.8;
  double coarse = 0.5;
};

struct EventComponents {
  double characters = 0.0;
  double location = 0.0;
  double semantic = 0.0;
  double total = 0.0;
};

double combine_event(double s_char, double s_loc, double s_sem, const EventWeights& w = {});

// Scores event pairs with one alias map and one embedder. Description
// embeddings are cached, so a scorer can be shared across threads.
class EventScorer {
 public:
  EventScorer(const AliasMap& aliases, providers::Embedder& embedder, EventParams params = {});

  EventComponents components(const Event& g, const Event& h);
  double similarity(const Event& g, const Event& h) { return components(g, h).total; }
  double semantic_similarity(std::string_view dg, std::string_view dh);
  std::set<std::string> canonical_characters(const Event& e) const;

  // How many location comparisons matched two empty strings.
  std::size_t empty_location_matches() const { return empty_location_matches_.load(); }

 private:
  providers::EmbeddingVector embedding(std::string_view text);

  const AliasMap& aliases_;
  providers::Embedder& embedder_;
  EventParams params_;
  std::mutex mu_;
  std::map<std::string, providers::EmbeddingVector, std::less<>> cache_;
  std::atomic<std::size_t> empty_location_matches_{0};
};

using Matrix = std::vector<std::vector<double>>;

// Maximum-total one-to-one assignment of an n_g x n_h similarity matrix,
// solved as min-cost on the negated matrix padded square with zeros. Returns
// min(n_g, n_h) (row, column) pairs sorted by row.
std::vector<std::pair<std::size_t, std::size_t>> hungarian_max(const Matrix& similarity);

struct Alignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (gt index, gen index), sorted by gt index
  std::vector<double> similarities;                         // parallel to pairs
  double avg_event_sim = 0.0;
};

// Optimal assignment filtered to pairs with similarity >= tau.
Alignment threshold_align(const Matrix& similarity, double tau = 0.5);

// Kendall tau-b. NaN when either side is constant. Throws InvalidArgument on
// a length mismatch or fewer than 2 elements.
double kendall_tau(const std::vector<double>& xs, const std::vector<double>& ys);

struct StructuralParams {
  double tau = 0.5;
  double alpha = 0.6;  // avg event similarity
  double beta = 0.2;   // coverage
  double gamma = 0.2;  // ordering

  void validate() const;
};

struct StructuralScore {
  double avg_event_sim = 0.0;
  double coverage = 0.0;
  double ordering = 0.0;
  double combined = 0.0;
  StructuralParams params;
  std::size_t n_g = 0;
  std::size_t n_h = 0;
  Alignment alignment;
  std::string warning;
};

// (tau_K + 1) / 2 over the aligned positions; 0 with fewer than 2 pairs, and
// tau_K taken as 1 when it is undefined.
double ordering_score(const std::vector<std::pair<std::size_t, std::size_t>>& pairs);
double combine_structural(double avg, double coverage, double ordering, const StructuralParams& p = {});

// Greedy one-to-one matching by descending similarity (ties: lower row, then
// lower column); counts rows matched at or above `threshold`.
std::size_t greedy_match_count(const Matrix& similarity, double threshold);

StructuralScore structural_from_matrix(const Matrix& similarity, std::size_t n_g, std::size_t n_h,
                                       const StructuralParams& params = {});
StructuralScore structural_similarity(const std::vector<Event>& g, const std::vector<Event>& h, EventScorer& scorer,
                                      const StructuralParams& params = {});

struct ExtractionResult {
  std::vector<Event> events;
  std::size_t dropped = 0;  // events with empty descriptions
  int attempts = 0;
};

std::string extraction_prompt(std::string_view passage);
// Parses {"events": [...]} or a bare array. Throws InvalidArgument when the
// response holds neither.
ExtractionResult parse_events(std::string_view response);
// Asks the extractor for events, retrying once on an unparseable response.
// Throws ProviderError(kBadResponse) after the retry.
ExtractionResult extract_events(std::string_view passage, providers::TextGenerator& extractor);

nlohmann::json events_to_json(const std::vector<Event>& events);
std::vector<Event> events_from_json(const nlohmann::json& j);

}  // namespace icsim::structsim
