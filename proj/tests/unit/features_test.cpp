#include <gtest/gtest.h>

#include <set>

#include <nlohmann/json.hpp>

#include "icsim/corpus.hpp"
#include "icsim/error.hpp"
#include "icsim/features.hpp"
#include "icsim/io.hpp"
#include "icsim/resources.hpp"
#include "icsim/tagger.hpp"
#include "test_support.hpp"

namespace icsim::features {
namespace {

const fs::path kCorpus = ICSIM_CORPUS_DIR;
const fs::path kFixtures = ICSIM_FIXTURES_DIR;

struct Novel {
  corpus::NovelRecord record;
  corpus::Segment context;
  corpus::Segment truth;
};

Novel load_novel(const std::string& id) {
  for (const auto& e : corpus::CorpusManifest::load(kCorpus / "manifest.ini").novels) {
    if (e.id != id) continue;
    Novel n{corpus::ingest_novel(e.path, e), {}, {}};
    std::tie(n.context, n.truth) = corpus::split_segments(n.record, e);
    return n;
  }
  throw std::runtime_error("no novel " + id);
}

TEST(Conditions, ElevenWithStableNamesAndIngredients) {
  std::set<std::string> slugs;
  for (ConditionId c : kAllConditions) {
    slugs.insert(std::string(slug(c)));
    EXPECT_EQ(parse_condition(slug(c)), c);
    EXPECT_EQ(parse_condition(display_name(c)), c);
  }
  EXPECT_EQ(slugs.size(), 11u);
  EXPECT_EQ(parse_condition("concept + linguistic"), ConditionId::kConceptLinguistic);
  EXPECT_EQ(parse_condition("BIGO PERSONALITY"), ConditionId::kBigFive);
  EXPECT_THROW(parse_condition("vibes"), InvalidArgument);

  EXPECT_TRUE(ingredients(ConditionId::kProfile).profile());
  EXPECT_FALSE(ingredients(ConditionId::kProfile).concepts);
  const auto pcl = ingredients(ConditionId::kProfileConceptLinguistic);
  EXPECT_TRUE(pcl.profile() && pcl.concepts && pcl.linguistic);
  EXPECT_EQ(ingredients(ConditionId::kBase), Ingredients{});
  EXPECT_TRUE(is_multi_feature(ConditionId::kConceptLinguistic));
  EXPECT_FALSE(is_multi_feature(ConditionId::kProfile));
  EXPECT_FALSE(is_multi_feature(ConditionId::kPersona));
}

TEST(ConceptMappings, ParsesQuotedAndPlainPairs) {
  const auto set = ConceptMappingSet::parse(
      "# comment\n`time' is `money'\nLOVE is a JOURNEY\n\xE2\x80\x98" "anger\xE2\x80\x99 is \xE2\x80\x98heat\xE2\x80\x99\n"
      "`TIME' is `MONEY'\n");
  ASSERT_EQ(set.pairs.size(), 3u);
  EXPECT_EQ(set.pairs[0], (ConceptPair{"TIME", "MONEY"}));
  EXPECT_EQ(set.pairs[1], (ConceptPair{"LOVE", "A JOURNEY"}));
  EXPECT_EQ(set.pairs[2], (ConceptPair{"ANGER", "HEAT"}));
  EXPECT_EQ(set.render(2), "`TIME' is `MONEY'\n`LOVE' is `A JOURNEY'");
  EXPECT_THROW(ConceptMappingSet::parse("no separator here"), InvalidArgument);
  EXPECT_THROW(ConceptMappingSet::parse("# only comments\n"), InvalidArgument);
  EXPECT_THROW(ConceptMappingSet::parse("`' is `X'"), InvalidArgument);
}

TEST(ConceptMappings, BundledFileLoads) {
  const auto set = ConceptMappingSet::load(kCorpus / "mappings" / "lamplighters_ledger.pairs");
  EXPECT_GE(set.pairs.size(), 5u);
  for (const auto& p : set.pairs) {
    EXPECT_EQ(p.target, text::to_upper(p.target));
  }
}

TEST(Sentiment, LexiconHitsAndDefaults) {
  const auto lex = SentimentLexicon::parse("good\t0.7\t0.6\nbad\t-0.7\t0.67\n");
  const auto [p, s] = polarity_subjectivity("A good day, a bad night.", lex);
  EXPECT_DOUBLE_EQ(p, 0.0);
  EXPECT_DOUBLE_EQ(s, (0.6 + 0.67) / 2);
  EXPECT_EQ(polarity_subjectivity("nothing matches", lex), (std::pair<double, double>{0.0, 0.0}));
  EXPECT_THROW(SentimentLexicon::parse("word\t1\n"), InvalidArgument);
  EXPECT_GT(SentimentLexicon::bundled().size(), 50u);
}

TEST(Tagger, ClosedClassAndSuffixRules) {
  const HeuristicTagger t;
  const std::vector<std::string> s = {"She", "was", "walking", "slowly", "with", "3", "famous", "Harbourton", "friends", "."};
  const auto tags = t.tag(s);
  ASSERT_EQ(tags.size(), s.size());
  EXPECT_EQ(tags[0], Pos::kPron);
  EXPECT_EQ(tags[1], Pos::kAux);
  EXPECT_EQ(tags[2], Pos::kVerb);
  EXPECT_EQ(tags[3], Pos::kAdv);
  EXPECT_EQ(tags[4], Pos::kAdp);
  EXPECT_EQ(tags[5], Pos::kNum);
  EXPECT_EQ(tags[6], Pos::kAdj);
  EXPECT_EQ(tags[7], Pos::kPropn);
  EXPECT_EQ(tags[8], Pos::kNoun);
  EXPECT_EQ(tags[9], Pos::kPunct);
  EXPECT_EQ(to_string(Pos::kCconj), "CCONJ");
}

TEST(Tfidf, MatchesOracleOnBundledChapters) {
  const auto expected = nlohmann::json::parse(io::read_file(kFixtures / "corpus_expected.json"));
  const auto stop = resources::load_wordlist(kFixtures / "stopwords.txt");
  for (const std::string id : {"lamplighters_ledger", "salt_and_signal"}) {
    const auto n = load_novel(id);
    std::vector<std::pair<int, std::string_view>> chapters;
    for (int c = 1; c <= 4; ++c) chapters.emplace_back(c, n.record.chapter(c));
    const auto topics = tfidf_topics(chapters, 5, stop);
    ASSERT_EQ(topics.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_EQ(topics[i].chapter, static_cast<int>(i) + 1);
      EXPECT_EQ(topics[i].words, expected[id]["topics_1_4"][i].get<std::vector<std::string>>()) << id << " " << i;
    }
  }
}

TEST(Tfidf, HandComputedTies) {
  // Two documents: "lamp" only in the first gets idf ln(3/2)+1; "sea" in both gets 1.
  resources::WordSet stop;
  const std::vector<std::pair<int, std::string_view>> chapters = {{1, "lamp sea sea"}, {2, "sea"}};
  const auto t = tfidf_topics(chapters, 2, stop);
  // lamp: 1 * 1.405 = 1.405, sea: 2 * 1 = 2.
  EXPECT_EQ(t[0].words, (std::vector<std::string>{"sea", "lamp"}));
  EXPECT_EQ(t[1].words, (std::vector<std::string>{"sea"}));
}

TEST(Profile, DeterministicAndComplete) {
  const auto n = load_novel("lamplighters_ledger");
  const auto a = extract_linguistic_profile(n.context);
  const auto b = extract_linguistic_profile(n.context);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.top_words.size(), 20u);
  EXPECT_LE(a.top_bigrams.size(), 10u);
  EXPECT_EQ(a.pos_histogram.size(), kAllPos.size());
  double sum = 0.0;
  for (const auto& [pos, share] : a.pos_histogram) sum += share;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_EQ(a.topics.size(), 4u);
  EXPECT_EQ(a.tone.size(), 4u);
  EXPECT_GT(a.sentence_length_mean, 0.0);
  for (std::size_t i = 1; i < a.top_words.size(); ++i) EXPECT_GE(a.top_words[i - 1].count, a.top_words[i].count);
  EXPECT_EQ(LinguisticProfile::from_json(a.to_json()), a);
}

TEST(Profile, StyleGuideHasFourSections) {
  const auto n = load_novel("salt_and_signal");
  const std::string g = extract_linguistic_profile(n.context).render_style_guide();
  for (const char* section : {"Lexical Style:", "Syntactic Style:", "Semantic Themes:", "Pragmatic Tone:"}) {
    EXPECT_NE(g.find(section), std::string::npos) << section;
  }
  EXPECT_NE(g.find("Chapter 1"), std::string::npos);
}

TEST(Prompts, EveryConditionEmbedsContextOnceWithoutLeaks) {
  const auto n = load_novel("lamplighters_ledger");
  const auto assets = AuthorAssets::load(kCorpus / "assets" / "edith_marrow");
  const auto mappings = ConceptMappingSet::load(kCorpus / "mappings" / "lamplighters_ledger.pairs");
  const auto profile = extract_linguistic_profile(n.context);
  for (ConditionId c : kAllConditions) {
    const auto b = assemble_prompt(c, n.context, n.record.title, assets, &profile, &mappings);
    EXPECT_EQ(text::count_occurrences(b.text, text::trim(n.context.text)), 1u) << slug(c);
    EXPECT_NE(b.text.find(n.record.title), std::string::npos);
    const auto audit = audit_prompt(b, n.context, n.truth);
    EXPECT_TRUE(audit.ok) << slug(c);
    const auto in = ingredients(c);
    EXPECT_EQ(b.text.find("Here is your persona profile:") != std::string::npos, in.persona) << slug(c);
    EXPECT_EQ(b.text.find(assets.background) != std::string::npos, in.background) << slug(c);
    EXPECT_EQ(b.text.find("Semantic Themes:") != std::string::npos, in.linguistic) << slug(c);
    EXPECT_EQ(b.text.find("`DEBT' is `BURDEN'") != std::string::npos, in.concepts) << slug(c);
  }
}

TEST(Prompts, TemplatesCarryTheirInstructions) {
  const auto n = load_novel("salt_and_signal");
  const auto assets = AuthorAssets::load(kCorpus / "assets" / "tobias_wren");
  const auto mappings = ConceptMappingSet::load(kCorpus / "mappings" / "salt_and_signal.pairs");
  const auto profile = extract_linguistic_profile(n.context);
  const auto base = assemble_prompt(ConditionId::kBase, n.context, "Salt and Signal", assets, nullptr, nullptr);
  EXPECT_EQ(base.text.rfind("You are the novel author of `Salt and Signal'.", 0), 0u);
  const auto ling = assemble_prompt(ConditionId::kLinguistic, n.context, "Salt and Signal", assets, &profile, nullptr);
  EXPECT_NE(ling.text.find("LINGUISTIC STYLE GUIDE:"), std::string::npos);
  EXPECT_NE(ling.text.find("DO NOT output the chapter number"), std::string::npos);
  const auto con = assemble_prompt(ConditionId::kConcept, n.context, "Salt and Signal", assets, nullptr, &mappings);
  EXPECT_NE(con.text.find("### Concept Mappings Pairs###"), std::string::npos);
  EXPECT_NE(con.text.find("### Continue the Narration Below ###"), std::string::npos);
  const auto cl = assemble_prompt(ConditionId::kConceptLinguistic, n.context, "Salt and Signal", assets, &profile,
                                  &mappings);
  EXPECT_LT(cl.text.find("Here is the concept mappings pairs:"), cl.text.find("Here is the linguistic style guide:"));
  EXPECT_EQ(cl.ingredients, (std::vector<std::string>{"concept", "linguistic"}));
}

TEST(Prompts, ConceptPairLimit) {
  const auto n = load_novel("salt_and_signal");
  const auto mappings = ConceptMappingSet::load(kCorpus / "mappings" / "salt_and_signal.pairs");
  PromptOptions o;
  o.max_concept_pairs = 1;
  const auto b = assemble_prompt(ConditionId::kConcept, n.context, "t", {}, nullptr, &mappings, o);
  EXPECT_NE(b.text.find(mappings.render(1)), std::string::npos);
  EXPECT_EQ(b.text.find(mappings.render(2)), std::string::npos);
}

TEST(Prompts, MissingIngredientsAreErrors) {
  const auto n = load_novel("salt_and_signal");
  AuthorAssets empty;
  EXPECT_THROW(assemble_prompt(ConditionId::kPersona, n.context, "t", empty, nullptr, nullptr), InvalidArgument);
  EXPECT_THROW(assemble_prompt(ConditionId::kLinguistic, n.context, "t", empty, nullptr, nullptr), InvalidArgument);
  EXPECT_THROW(assemble_prompt(ConditionId::kConcept, n.context, "t", empty, nullptr, nullptr), InvalidArgument);
  EXPECT_THROW(assemble_prompt(ConditionId::kBase, n.truth, "t", empty, nullptr, nullptr), InvalidArgument);
}

TEST(Prompts, AuditCatchesLeakage) {
  const auto n = load_novel("salt_and_signal");
  auto b = assemble_prompt(ConditionId::kBase, n.context, "t", {}, nullptr, nullptr);
  EXPECT_TRUE(audit_prompt(b, n.context, n.truth).ok);
  std::string longest;
  for (const auto& s : text::split_sentences(n.truth.text)) {
    if (s.length > longest.size()) longest = std::string(s.view(n.truth.text));
  }
  ASSERT_GE(text::count_words(longest), 12u);
  b.text += "\n" + longest;
  EXPECT_FALSE(audit_prompt(b, n.context, n.truth).ok);
  b.text += "\n" + std::string(text::trim(n.context.text));
  EXPECT_GE(audit_prompt(b, n.context, n.truth).problems.size(), 2u);
}

}  // namespace
}  // namespace icsim::features
