#include "icsim/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "icsim/error.hpp"
#include "icsim/io.hpp"
#include "icsim/text.hpp"

namespace icsim::features {
namespace {

struct ConditionInfo {
  ConditionId id;
  std::string_view slug;
  std::string_view display;
  Ingredients ingredients;
};

constexpr Ingredients kProfileBlocks{true, true, true, false, false};

const std::array<ConditionInfo, 11>& condition_table() {
  static const std::array<ConditionInfo, 11> table = {{
      {ConditionId::kBase, "base", "Base", {}},
      {ConditionId::kPersona, "persona", "Persona", {true, false, false, false, false}},
      {ConditionId::kBackground, "background", "Background", {false, true, false, false, false}},
      {ConditionId::kBigFive, "bigfive", "BigO Personality", {false, false, true, false, false}},
      {ConditionId::kLinguistic, "linguistic", "Linguistic", {false, false, false, false, true}},
      {ConditionId::kConcept, "concept", "Concept", {false, false, false, true, false}},
      {ConditionId::kProfile, "profile", "Profile", kProfileBlocks},
      {ConditionId::kConceptLinguistic, "concept+linguistic", "Concept + Linguistic",
       {false, false, false, true, true}},
      {ConditionId::kConceptProfile, "concept+profile", "Concept + Profile", {true, true, true, true, false}},
      {ConditionId::kProfileLinguistic, "profile+linguistic", "Profile + Linguistic",
       {true, true, true, false, true}},
      {ConditionId::kProfileConceptLinguistic, "profile+concept+linguistic", "Profile + Concept + Linguistic",
       {true, true, true, true, true}},
  }};
  return table;
}

const ConditionInfo& info(ConditionId id) {
  for (const auto& c : condition_table()) {
    if (c.id == id) return c;
  }
  throw InvalidArgument("unknown condition id");
}

std::string squash(std::string_view s) {
  std::string out;
  for (char c : text::to_lower(s)) {
    if (c != ' ' && c != '_') out.push_back(c);
  }
  return out;
}

// Strips one layer of ASCII or curly quotes from both ends.
std::string_view strip_quotes(std::string_view s) {
  s = text::trim(s);
  for (std::string_view q : {"`", "'", "\"", "\xE2\x80\x98", "\xE2\x80\x99", "\xE2\x80\x9C", "\xE2\x80\x9D"}) {
    if (s.size() >= q.size() && s.substr(0, q.size()) == q) {
      s.remove_prefix(q.size());
      break;
    }
  }
  for (std::string_view q : {"'", "`", "\"", "\xE2\x80\x99", "\xE2\x80\x98", "\xE2\x80\x9D", "\xE2\x80\x9C"}) {
    if (s.size() >= q.size() && s.substr(s.size() - q.size()) == q) {
      s.remove_suffix(q.size());
      break;
    }
  }
  return text::trim(s);
}

std::string normalize_concept(std::string_view s) {
  std::string out;
  bool gap = false;
  for (char c : text::to_upper(strip_quotes(s))) {
    if (c == ' ' || c == '\t') {
      gap = !out.empty();
      continue;
    }
    if (gap) out.push_back(' ');
    gap = false;
    out.push_back(c);
  }
  return out;
}

bool content_word(const std::string& w, const resources::WordSet& stop) {
  if (stop.count(w) != 0) return false;
  return std::any_of(w.begin(), w.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || (c & 0x80); });
}

template <typename Map>
std::vector<TermCount> top_terms(const Map& counts, std::size_t k) {
  std::vector<TermCount> v;
  v.reserve(counts.size());
  for (const auto& [term, n] : counts) v.push_back({term, n});
  std::sort(v.begin(), v.end(), [](const TermCount& a, const TermCount& b) {
    return a.count != b.count ? a.count > b.count : a.term < b.term;
  });
  if (v.size() > k) v.resize(k);
  return v;
}

std::string join_terms(const std::vector<TermCount>& terms) {
  std::vector<std::string> parts;
  for (const auto& t : terms) parts.push_back(t.term);
  return text::join(parts, ", ");
}

}  // namespace

std::string_view slug(ConditionId id) { return info(id).slug; }
std::string_view display_name(ConditionId id) { return info(id).display; }
Ingredients ingredients(ConditionId id) { return info(id).ingredients; }

ConditionId parse_condition(std::string_view name) {
  const std::string key = squash(name);
  for (const auto& c : condition_table()) {
    if (squash(c.slug) == key || squash(c.display) == key) return c.id;
  }
  throw InvalidArgument("unknown condition '" + std::string(name) + "'");
}

bool is_multi_feature(ConditionId id) {
  const Ingredients in = ingredients(id);
  const int groups = (in.profile() ? 1 : 0) + (in.concepts ? 1 : 0) + (in.linguistic ? 1 : 0);
  return groups >= 2;
}

AuthorAssets AuthorAssets::load(const fs::path& dir) {
  AuthorAssets a;
  auto read = [&](const char* name) -> std::string {
    const fs::path p = dir / name;
    if (!fs::exists(p)) return {};
    return std::string(text::trim(io::read_file(p)));
  };
  a.persona = read("persona.txt");
  a.background = read("background.txt");
  a.personality = read("personality.txt");
  return a;
}

ConceptMappingSet ConceptMappingSet::parse(std::string_view content) {
  ConceptMappingSet set;
  std::set<std::pair<std::string, std::string>> seen;
  int line_no = 0;
  for (const std::string& raw : text::split(content, '\n')) {
    ++line_no;
    const std::string_view line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto pos = line.find(" is ");
    if (pos == std::string_view::npos) {
      throw InvalidArgument("concept mappings line " + std::to_string(line_no) + ": expected `TARGET' is `SOURCE'");
    }
    ConceptPair pair{normalize_concept(line.substr(0, pos)), normalize_concept(line.substr(pos + 4))};
    if (pair.target.empty() || pair.source.empty()) {
      throw InvalidArgument("concept mappings line " + std::to_string(line_no) + ": empty concept");
    }
    if (seen.emplace(pair.target, pair.source).second) set.pairs.push_back(std::move(pair));
  }
  if (set.pairs.empty()) throw InvalidArgument("concept mappings: no pairs");
  return set;
}

ConceptMappingSet ConceptMappingSet::load(const fs::path& path) {
  try {
    return parse(io::read_file(path));
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

std::string ConceptMappingSet::render(std::size_t limit) const {
  const std::size_t n = limit == 0 ? pairs.size() : std::min(limit, pairs.size());
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out += '\n';
    out += "`" + pairs[i].target + "' is `" + pairs[i].source + "'";
  }
  return out;
}

SentimentLexicon SentimentLexicon::parse(std::string_view tsv) {
  SentimentLexicon lex;
  int line_no = 0;
  for (const std::string& raw : text::split(tsv, '\n')) {
    ++line_no;
    const std::string_view line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 3) throw InvalidArgument("lexicon line " + std::to_string(line_no) + ": expected 3 columns");
    Entry e;
    try {
      e.polarity = std::stod(cols[1]);
      e.subjectivity = std::stod(cols[2]);
    } catch (const std::exception&) {
      throw InvalidArgument("lexicon line " + std::to_string(line_no) + ": bad number");
    }
    if (e.polarity < -1.0 || e.polarity > 1.0 || e.subjectivity < 0.0 || e.subjectivity > 1.0) {
      throw InvalidArgument("lexicon line " + std::to_string(line_no) + ": value out of range");
    }
    lex.entries_[text::to_lower(text::trim(cols[0]))] = e;
  }
  return lex;
}

SentimentLexicon SentimentLexicon::load(const fs::path& path) { return parse(io::read_file(path)); }

const SentimentLexicon& SentimentLexicon::bundled() {
  static const SentimentLexicon lex = parse(resources::default_lexicon_tsv());
  return lex;
}

const SentimentLexicon::Entry* SentimentLexicon::find(std::string_view w) const {
  const auto it = entries_.find(std::string(w));
  return it == entries_.end() ? nullptr : &it->second;
}

std::pair<double, double> polarity_subjectivity(std::string_view text, const SentimentLexicon& lexicon) {
  double pol = 0.0;
  double subj = 0.0;
  std::size_t hits = 0;
  for (const std::string& w : text::words(text)) {
    if (const auto* e = lexicon.find(w)) {
      pol += e->polarity;
      subj += e->subjectivity;
      ++hits;
    }
  }
  if (hits == 0) return {0.0, 0.0};
  return {pol / static_cast<double>(hits), subj / static_cast<double>(hits)};
}

std::vector<ChapterTopics> tfidf_topics(const std::vector<std::pair<int, std::string_view>>& chapters,
                                        std::size_t k, const resources::WordSet& stopwords) {
  std::vector<std::map<std::string, std::size_t>> tf(chapters.size());
  std::map<std::string, std::size_t> df;
  for (std::size_t i = 0; i < chapters.size(); ++i) {
    for (const std::string& w : text::words(chapters[i].second)) {
      if (content_word(w, stopwords)) ++tf[i][w];
    }
    for (const auto& [w, n] : tf[i]) ++df[w];
  }
  const double n_docs = static_cast<double>(chapters.size());
  std::vector<ChapterTopics> out;
  for (std::size_t i = 0; i < chapters.size(); ++i) {
    std::vector<std::pair<std::string, double>> scored;
    for (const auto& [w, n] : tf[i]) {
      const double idf = std::log((1.0 + n_docs) / (1.0 + static_cast<double>(df[w]))) + 1.0;
      scored.emplace_back(w, static_cast<double>(n) * idf);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    ChapterTopics t{chapters[i].first, {}};
    for (std::size_t j = 0; j < scored.size() && j < k; ++j) t.words.push_back(scored[j].first);
    out.push_back(std::move(t));
  }
  return out;
}

LinguisticProfile extract_linguistic_profile(const corpus::Segment& context, const ProfileOptions& options,
                                             const FeatureResources& res) {
  const resources::WordSet& stop = *res.stopwords;
  const std::string_view body = text::trim(context.text);
  LinguisticProfile p;

  std::map<std::string, std::size_t> word_counts;
  std::map<std::string, std::size_t> bigram_counts;
  std::map<std::string, std::size_t> punct_counts;
  std::array<std::size_t, kAllPos.size()> pos_counts{};
  std::size_t total_tokens = 0;
  std::size_t total_words = 0;
  std::vector<double> lengths;

  const auto& tok = text::default_tokenizer();
  for (const text::Span& s : text::split_sentences(body)) {
    const std::string_view sentence = s.view(body);
    lengths.push_back(static_cast<double>(text::count_words(sentence)));
    const std::vector<std::string> tokens = tok.tokenize(sentence);
    const std::vector<Pos> tags = res.tagger->tag(tokens);
    std::string prev;  // previous content word, empty when the chain is broken
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      ++pos_counts[static_cast<std::size_t>(tags[i])];
      ++total_tokens;
      if (!text::is_word_token(tokens[i])) {
        ++punct_counts[tokens[i]];
        prev.clear();
        continue;
      }
      ++total_words;
      const std::string w = text::to_lower(tokens[i]);
      if (!content_word(w, stop)) {
        prev.clear();
        continue;
      }
      ++word_counts[w];
      if (!prev.empty()) ++bigram_counts[prev + " " + w];
      prev = w;
    }
  }

  p.top_words = top_terms(word_counts, options.top_words);
  p.top_bigrams = top_terms(bigram_counts, options.top_bigrams);
  for (Pos pos : kAllPos) {
    const double share = total_tokens == 0 ? 0.0
                                            : static_cast<double>(pos_counts[static_cast<std::size_t>(pos)]) /
                                                  static_cast<double>(total_tokens);
    p.pos_histogram.emplace_back(pos, share);
  }
  if (!lengths.empty()) {
    double sum = 0.0;
    for (double l : lengths) sum += l;
    p.sentence_length_mean = sum / static_cast<double>(lengths.size());
    double sq = 0.0;
    for (double l : lengths) sq += (l - p.sentence_length_mean) * (l - p.sentence_length_mean);
    p.sentence_length_std = std::sqrt(sq / static_cast<double>(lengths.size()));
  }
  if (total_words > 0) {
    const auto marks = top_terms(punct_counts, options.punctuation_marks);
    for (const auto& m : marks) {
      p.punctuation_per_100_words.emplace_back(m.term, 100.0 * static_cast<double>(m.count) /
                                                           static_cast<double>(total_words));
    }
  }

  const auto chapters = context.chapters();
  p.topics = tfidf_topics(chapters, options.topic_words, stop);
  for (const auto& [number, chapter_text] : chapters) {
    const auto [pol, subj] = polarity_subjectivity(chapter_text, *res.lexicon);
    p.tone.push_back({number, pol, subj});
  }
  return p;
}

nlohmann::json LinguisticProfile::to_json() const {
  using nlohmann::json;
  auto terms = [](const std::vector<TermCount>& v) {
    json a = json::array();
    for (const auto& t : v) a.push_back({{"term", t.term}, {"count", t.count}});
    return a;
  };
  json pos = json::object();
  for (const auto& [tag, share] : pos_histogram) pos[std::string(to_string(tag))] = share;
  json punct = json::array();
  for (const auto& [mark, rate] : punctuation_per_100_words) punct.push_back({{"mark", mark}, {"rate", rate}});
  json topics_j = json::array();
  for (const auto& t : topics) topics_j.push_back({{"chapter", t.chapter}, {"words", t.words}});
  json tone_j = json::array();
  for (const auto& t : tone) {
    tone_j.push_back({{"chapter", t.chapter}, {"polarity", t.polarity}, {"subjectivity", t.subjectivity}});
  }
  return {{"top_words", terms(top_words)},
          {"top_bigrams", terms(top_bigrams)},
          {"pos_histogram", pos},
          {"sentence_length", {{"mean", sentence_length_mean}, {"std", sentence_length_std}}},
          {"punctuation_per_100_words", punct},
          {"topics", topics_j},
          {"tone", tone_j}};
}

LinguisticProfile LinguisticProfile::from_json(const nlohmann::json& j) {
  LinguisticProfile p;
  for (const auto& t : j.at("top_words")) p.top_words.push_back({t.at("term"), t.at("count")});
  for (const auto& t : j.at("top_bigrams")) p.top_bigrams.push_back({t.at("term"), t.at("count")});
  for (Pos pos : kAllPos) {
    p.pos_histogram.emplace_back(pos, j.at("pos_histogram").value(std::string(to_string(pos)), 0.0));
  }
  p.sentence_length_mean = j.at("sentence_length").at("mean");
  p.sentence_length_std = j.at("sentence_length").at("std");
  for (const auto& m : j.at("punctuation_per_100_words")) {
    p.punctuation_per_100_words.emplace_back(m.at("mark"), m.at("rate"));
  }
  for (const auto& t : j.at("topics")) p.topics.push_back({t.at("chapter"), t.at("words")});
  for (const auto& t : j.at("tone")) p.tone.push_back({t.at("chapter"), t.at("polarity"), t.at("subjectivity")});
  return p;
}

std::string LinguisticProfile::render_style_guide() const {
  std::ostringstream out;
  out << "Lexical Style:\n";
  out << "Frequent vocabulary: " << join_terms(top_words) << "\n";
  out << "Common bi-grams: " << join_terms(top_bigrams) << "\n\n";

  out << "Syntactic Style:\n";
  std::vector<std::pair<Pos, double>> pos = pos_histogram;
  std::stable_sort(pos.begin(), pos.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> parts;
  for (const auto& [tag, share] : pos) {
    if (share > 0.0) parts.push_back(std::string(to_string(tag)) + " " + io::fixed(share, 3));
  }
  out << "Part-of-speech distribution: " << text::join(parts, ", ") << "\n";
  out << "Average sentence length: " << io::fixed(sentence_length_mean, 1) << " words (std "
      << io::fixed(sentence_length_std, 1) << ")\n";
  parts.clear();
  for (const auto& [mark, rate] : punctuation_per_100_words) parts.push_back(mark + " " + io::fixed(rate, 2));
  out << "Punctuation per 100 words: " << text::join(parts, "; ") << "\n\n";

  out << "Semantic Themes:\nRecurring topic words across chapters:\n";
  for (const auto& t : topics) out << "Chapter " << t.chapter << ": " << text::join(t.words, ", ") << "\n";
  out << "\nPragmatic Tone:\n";
  for (const auto& t : tone) {
    out << "Chapter " << t.chapter << " \xE2\x80\x93 Polarity: " << io::fixed(t.polarity, 3)
        << ", Subjectivity: " << io::fixed(t.subjectivity, 3) << "\n";
  }
  std::string s = out.str();
  while (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

namespace {

constexpr std::string_view kContinueLines =
    "You are given the opening chapters of this novel.\n"
    "Your job is to continue writing and only output the narration.\n"
    "The narration should be in the style of the novel.\n";

void require(bool present, std::string_view what, ConditionId id) {
  if (!present) {
    throw InvalidArgument("condition '" + std::string(slug(id)) + "' needs " + std::string(what));
  }
}

std::string base_prompt(std::string_view title, std::string_view context) {
  return "You are the novel author of `" + std::string(title) + "'.\n" + std::string(kContinueLines) + "\n" +
         std::string(context);
}

std::string single_asset_prompt(std::string_view title, std::string_view header, std::string_view value,
                                std::string_view context) {
  return "You are the author of `" + std::string(title) + "'.\n" + std::string(header) + "\n" +
         std::string(value) + "\n\n" + std::string(kContinueLines) + "\n" + std::string(context);
}

std::string linguistic_prompt(std::string_view title, std::string_view context, const std::string& guide) {
  return "You are the author of `" + std::string(title) +
         "'.\n"
         "You are given the opening chapters of this novel, followed by a stylistic analysis.\n"
         "Your job is to continue writing and only output the narration.\n"
         "The continuation should strictly match the established voice, tone, pacing, and style of the original "
         "text.\n\n"
         "PREVIOUS CHAPTERS:\n" +
         std::string(context) + "\n\nLINGUISTIC STYLE GUIDE:\n\n" + guide +
         "\n\nINSTRUCTION:\n"
         "Write the continuation of the story.\n"
         "Maintain consistency in character voice, sentence rhythm, lexical choices, and overall tone.\n"
         "Output only the next chapter of the narrative and DO NOT output the chapter number.\n";
}

std::string concept_prompt(std::string_view title, std::string_view context, const std::string& pairs) {
  return "You are the author of '" + std::string(title) +
         "'.\n\n"
         "The following concept mappings pairs are provided as thematic inspiration:\n"
         "### Concept Mappings Pairs###\n" +
         pairs +
         "\n### End of Concept Mappings ###\n\n"
         "Below is the beginning of your novel:\n"
         "### Opening Chapters ###\n" +
         std::string(context) +
         "\n### End of Opening Chapters ###\n\n"
         "Your task is to continue writing the narration in the same tone and style.\n"
         "Incorporate the above concept mappings where thematically appropriate.\n"
         "Do not explain or label anything \xE2\x80\x94 only output the next part of the narration.\n"
         "Do not include chapter number.\n\n"
         "### Continue the Narration Below ###\n";
}

// Author-profile and multi-feature conditions share one layout: quoted blocks
// in the order profile, concept, linguistic, then the continuation lines.
std::string combined_prompt(std::string_view title, std::string_view context, const Ingredients& in,
                            const AuthorAssets& assets, const std::string& pairs, const std::string& guide) {
  std::string out = "You are the author of `" + std::string(title) + "'.\n\n";
  auto block = [&](std::string_view header, std::string_view value) {
    out += std::string(header) + "\n`" + std::string(value) + "'\n\n";
  };
  if (in.persona) block("Here is your persona profile:", assets.persona);
  if (in.background) block("Here is your background:", assets.background);
  if (in.personality) block("Here is your Big Five/OCEAN personality profile:", assets.personality);
  if (in.concepts) block("Here is the concept mappings pairs:", pairs);
  if (in.linguistic) block("Here is the linguistic style guide:", guide);
  out += std::string(kContinueLines) + "\n" + std::string(context);
  return out;
}

}  // namespace

PromptBundle assemble_prompt(ConditionId condition, const corpus::Segment& context, std::string_view title,
                             const AuthorAssets& assets, const LinguisticProfile* profile,
                             const ConceptMappingSet* mappings, const PromptOptions& options) {
  if (context.kind != corpus::SegmentKind::kContext) {
    throw InvalidArgument("assemble_prompt: segment is not a context segment");
  }
  const std::string_view ctx = text::trim(context.text);
  if (ctx.empty()) throw InvalidArgument("assemble_prompt: empty context");
  const Ingredients in = ingredients(condition);
  if (in.persona) require(!assets.persona.empty(), "a persona", condition);
  if (in.background) require(!assets.background.empty(), "a background", condition);
  if (in.personality) require(!assets.personality.empty(), "a personality profile", condition);
  if (in.linguistic) require(profile != nullptr, "a linguistic profile", condition);
  if (in.concepts) require(mappings != nullptr && !mappings->pairs.empty(), "concept mappings", condition);

  const std::string guide = in.linguistic ? profile->render_style_guide() : std::string{};
  const std::string pairs = in.concepts ? mappings->render(options.max_concept_pairs) : std::string{};

  PromptBundle b;
  b.condition = condition;
  b.novel_id = context.novel_id;
  switch (condition) {
    case ConditionId::kBase: b.text = base_prompt(title, ctx); break;
    case ConditionId::kPersona:
      b.text = single_asset_prompt(title, "Here is your persona profile:", assets.persona, ctx);
      break;
    case ConditionId::kBackground:
      b.text = single_asset_prompt(title, "Here is your background:", assets.background, ctx);
      break;
    case ConditionId::kBigFive:
      b.text = single_asset_prompt(title, "Here is your Big Five/OCEAN personality profile:", assets.personality, ctx);
      break;
    case ConditionId::kLinguistic: b.text = linguistic_prompt(title, ctx, guide); break;
    case ConditionId::kConcept: b.text = concept_prompt(title, ctx, pairs); break;
    default: b.text = combined_prompt(title, ctx, in, assets, pairs, guide); break;
  }
  if (in.persona) b.ingredients.emplace_back("persona");
  if (in.background) b.ingredients.emplace_back("background");
  if (in.personality) b.ingredients.emplace_back("personality");
  if (in.concepts) b.ingredients.emplace_back("concept");
  if (in.linguistic) b.ingredients.emplace_back("linguistic");
  return b;
}

PromptAudit audit_prompt(const PromptBundle& bundle, const corpus::Segment& context,
                         const corpus::Segment& ground_truth) {
  PromptAudit a;
  const std::string_view ctx = text::trim(context.text);
  const std::size_t n = text::count_occurrences(bundle.text, ctx);
  if (n != 1) {
    a.problems.push_back("context appears " + std::to_string(n) + " times");
  }
  const std::string_view truth = ground_truth.text;
  for (const text::Span& s : text::split_sentences(truth)) {
    const std::string_view sentence = s.view(truth);
    if (text::count_words(sentence) < 12) continue;
    if (ctx.find(sentence) != std::string_view::npos) continue;  // also legitimately in the context
    if (bundle.text.find(sentence) != std::string::npos) {
      a.problems.push_back("ground-truth sentence leaked: " + std::string(sentence.substr(0, 60)));
    }
  }
  a.ok = a.problems.empty();
  return a;
}

}  // namespace icsim::features
