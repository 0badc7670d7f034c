#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "icsim/corpus.hpp"
#include "icsim/resources.hpp"
#include "icsim/tagger.hpp"

namespace icsim::features {

namespace fs = std::filesystem;

enum class ConditionId {
  kBase,
  kPersona,
  kBackground,
  kBigFive,
  kLinguistic,
  kConcept,
  kProfile,
  kConceptLinguistic,
  kConceptProfile,
  kProfileLinguistic,
  kProfileConceptLinguistic,
};

inline constexpr std::array<ConditionId, 11> kAllConditions = {
    ConditionId::kProfile,          ConditionId::kBackground,        ConditionId::kConcept,
    ConditionId::kBase,             ConditionId::kLinguistic,        ConditionId::kBigFive,
    ConditionId::kPersona,          ConditionId::kConceptLinguistic, ConditionId::kConceptProfile,
    ConditionId::kProfileLinguistic, ConditionId::kProfileConceptLinguistic};

// Feature blocks a condition injects into its prompt.
struct Ingredients {
  bool persona = false;
  bool background = false;
  bool personality = false;
  bool concepts = false;
  bool linguistic = false;

  bool profile() const { return persona && background && personality; }
  bool operator==(const Ingredients&) const = default;
};

std::string_view slug(ConditionId id);          // file-name form, e.g. "concept+linguistic"
std::string_view display_name(ConditionId id);  // table form, e.g. "Concept + Linguistic"
// Accepts a slug or a display name, case-insensitively.
ConditionId parse_condition(std::string_view name);
Ingredients ingredients(ConditionId id);
bool is_multi_feature(ConditionId id);

struct AuthorAssets {
  std::string persona;
  std::string background;
  std::string personality;

  // Reads persona.txt, background.txt, personality.txt; missing files stay empty.
  static AuthorAssets load(const fs::path& dir);
};

struct ConceptPair {
  std::string target;
  std::string source;
  bool operator==(const ConceptPair&) const = default;
};

struct ConceptMappingSet {
  std::vector<ConceptPair> pairs;

  // One "`TARGET' is `SOURCE'" pair per line; plain "TARGET is SOURCE" is also
  // accepted. Concepts are upper-cased and duplicates dropped, first one kept.
  static ConceptMappingSet parse(std::string_view content);
  static ConceptMappingSet load(const fs::path& path);
  // `limit` of 0 means all pairs.
  std::string render(std::size_t limit = 0) const;
};

class SentimentLexicon {
 public:
  struct Entry {
    double polarity = 0.0;
    double subjectivity = 0.0;
  };
  static SentimentLexicon parse(std::string_view tsv);
  static SentimentLexicon load(const fs::path& path);
  static const SentimentLexicon& bundled();
  const Entry* find(std::string_view lowercase_word) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, Entry> entries_;
};

// Mean polarity and subjectivity over the lexicon hits in `text`; (0, 0) when
// nothing hits.
std::pair<double, double> polarity_subjectivity(std::string_view text, const SentimentLexicon& lexicon);

struct TermCount {
  std::string term;
  std::size_t count = 0;
  bool operator==(const TermCount&) const = default;
};

struct ChapterTopics {
  int chapter = 0;
  std::vector<std::string> words;
  bool operator==(const ChapterTopics&) const = default;
};

struct ChapterTone {
  int chapter = 0;
  double polarity = 0.0;
  double subjectivity = 0.0;
  bool operator==(const ChapterTone&) const = default;
};

struct LinguisticProfile {
  std::vector<TermCount> top_words;
  std::vector<TermCount> top_bigrams;  // "first second"
  std::vector<std::pair<Pos, double>> pos_histogram;  // every tag, shares summing to 1
  double sentence_length_mean = 0.0;
  double sentence_length_std = 0.0;
  std::vector<std::pair<std::string, double>> punctuation_per_100_words;
  std::vector<ChapterTopics> topics;
  std::vector<ChapterTone> tone;

  nlohmann::json to_json() const;
  static LinguisticProfile from_json(const nlohmann::json& j);
  // The style-guide block embedded in linguistic prompts.
  std::string render_style_guide() const;
  bool operator==(const LinguisticProfile&) const = default;
};

struct ProfileOptions {
  std::size_t top_words = 20;
  std::size_t top_bigrams = 10;
  std::size_t topic_words = 5;
  std::size_t punctuation_marks = 8;
};

struct FeatureResources {
  const resources::WordSet* stopwords = &resources::stopwords();
  const SentimentLexicon* lexicon = &SentimentLexicon::bundled();
  const Tagger* tagger = &default_tagger();
};

// Per-chapter TF-IDF: raw term count times ln((1 + N) / (1 + df)) + 1, over
// non-stopword words. Ties break lexicographically.
std::vector<ChapterTopics> tfidf_topics(const std::vector<std::pair<int, std::string_view>>& chapters,
                                        std::size_t k, const resources::WordSet& stopwords);

LinguisticProfile extract_linguistic_profile(const corpus::Segment& context, const ProfileOptions& options = {},
                                             const FeatureResources& res = {});

struct PromptOptions {
  std::size_t max_concept_pairs = 0;  // 0 keeps every pair
};

struct PromptBundle {
  ConditionId condition = ConditionId::kBase;
  std::string novel_id;
  std::string text;
  std::vector<std::string> ingredients;
};

// Throws InvalidArgument when the condition needs an ingredient that is absent
// (empty asset text, null profile, null or empty mapping set).
PromptBundle assemble_prompt(ConditionId condition, const corpus::Segment& context, std::string_view title,
                             const AuthorAssets& assets, const LinguisticProfile* profile,
                             const ConceptMappingSet* mappings, const PromptOptions& options = {});

struct PromptAudit {
  bool ok = true;
  std::vector<std::string> problems;
};

// The context must appear exactly once and no ground-truth sentence of 12 or
// more words may appear at all.
PromptAudit audit_prompt(const PromptBundle& bundle, const corpus::Segment& context,
                         const corpus::Segment& ground_truth);

}  // namespace icsim::features
