#include <gtest/gtest.h>

#include "icsim/error.hpp"
#include "icsim/io.hpp"
#include "icsim/text.hpp"
#include "test_support.hpp"

namespace icsim {
namespace {

TEST(Tokenizer, SplitsWordsAndPunctuation) {
  const auto toks = text::default_tokenizer().tokenize("Don't stop, Nell!");
  EXPECT_EQ(toks, (std::vector<std::string>{"Don't", "stop", ",", "Nell", "!"}));
}

TEST(Tokenizer, TrailingApostropheIsPunctuation) {
  const auto toks = text::default_tokenizer().tokenize("the sailors' rope");
  EXPECT_EQ(toks, (std::vector<std::string>{"the", "sailors", "'", "rope"}));
}

TEST(Tokenizer, EmptyAndWhitespace) {
  EXPECT_EQ(text::default_tokenizer().count(""), 0u);
  EXPECT_EQ(text::default_tokenizer().count(" \n\t "), 0u);
}

TEST(Text, CountWordsIsWhitespaceDelimited) {
  EXPECT_EQ(text::count_words(""), 0u);
  EXPECT_EQ(text::count_words("One two three."), 3u);
  EXPECT_EQ(text::count_words("  a\tb\n\nc -- d "), 5u);
}

TEST(Text, SentenceSplitting) {
  const std::string s = "He ran. \"Stop!\" she cried. Why?\n\nA new line";
  const auto spans = text::split_sentences(s);
  // A terminator plus closing quote ends a sentence even before lowercase.
  ASSERT_EQ(spans.size(), 5u);
  EXPECT_EQ(spans[0].view(s), "He ran.");
  EXPECT_EQ(spans[1].view(s), "\"Stop!\"");
  EXPECT_EQ(spans[2].view(s), "she cried.");
  EXPECT_EQ(spans[3].view(s), "Why?");
  EXPECT_EQ(spans[4].view(s), "A new line");
}

TEST(Text, DecimalPointDoesNotEndSentence) {
  const std::string s = "It cost 3.50 pounds. Cheap.";
  EXPECT_EQ(text::split_sentences(s).size(), 2u);
}

TEST(Text, WordsAreLowercasedWithoutPunctuation) {
  EXPECT_EQ(text::words("The Bell, the BELL."), (std::vector<std::string>{"the", "bell", "the", "bell"}));
}

TEST(Text, Fnv1aKnownVectors) {
  // Published FNV-1a 64-bit test vectors.
  EXPECT_EQ(text::fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(text::fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(text::fnv1a("foobar"), 0x85944171f73967e8ULL);
}

TEST(Text, Utf8Decoding) {
  std::size_t pos = 0;
  const std::string s = "\xE2\x80\x94x";  // em dash, then x
  EXPECT_EQ(text::decode_utf8(s, pos), char32_t{0x2014});
  EXPECT_EQ(pos, 3u);
  EXPECT_FALSE(text::is_valid_utf8("\xC3"));
  EXPECT_TRUE(text::is_valid_utf8("caf\xC3\xA9"));
}

TEST(Io, CsvQuoting) {
  EXPECT_EQ(io::csv_field("plain"), "plain");
  EXPECT_EQ(io::csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(io::csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(io::csv_row({"a", "b,c"}), "a,\"b,c\"\n");
}

TEST(Io, CsvRoundTripSkipsComments) {
  testing::TempDir dir;
  const auto path = dir.path() / "t.csv";
  io::write_file_atomic(path, "# header\nA,B\n1,\"x,y\"\n");
  const auto rows = io::read_csv(path);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1], (std::vector<std::string>{"1", "x,y"}));
}

TEST(Io, JsonlRoundTripWithProvenance) {
  testing::TempDir dir;
  const auto path = dir.path() / "rows.jsonl";
  io::write_jsonl(path, {{{"a", 1}}, {{"a", 2}}}, {"stage", "3", "cafe"});
  const std::string raw = io::read_file(path);
  EXPECT_NE(raw.find("\"_provenance\""), std::string::npos);
  EXPECT_NE(raw.find("\"cafe\""), std::string::npos);
  const auto rows = io::read_jsonl(path);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1]["a"], 2);
}

TEST(Io, ProvenanceCsvHeader) {
  const io::Provenance p{"judge", "1", "abc"};
  EXPECT_EQ(p.csv_header(), "# icsim stage=judge version=1 config=abc\n");
}

TEST(Io, MissingFileIsMissingArtifact) {
  EXPECT_THROW(io::require_file("/nonexistent/icsim/file", "thing"), MissingArtifact);
  EXPECT_THROW(io::read_file("/nonexistent/icsim/file"), Error);
}

TEST(Io, AppenderAppends) {
  testing::TempDir dir;
  const auto path = dir.path() / "log.jsonl";
  {
    io::JsonlAppender log(path);
    log.append({{"n", 1}});
  }
  {
    io::JsonlAppender log(path);
    log.append({{"n", 2}});
  }
  EXPECT_EQ(io::read_jsonl(path).size(), 2u);
}

TEST(Io, FindJsonObjectSkipsProseAndBracesInStrings) {
  const auto j = io::find_json_object("Sure! Here it is:\n```json\n{\"score\": 4, \"rationale\": \"uses {braces}\"}\n```");
  ASSERT_TRUE(j.has_value());
  EXPECT_EQ((*j)["score"], 4);
  EXPECT_EQ((*j)["rationale"], "uses {braces}");
  EXPECT_FALSE(io::find_json_object("no json here").has_value());
  EXPECT_FALSE(io::find_json_object("{broken").has_value());
}

TEST(Io, FixedFormatting) {
  EXPECT_EQ(io::fixed(3.086, 2), "3.09");
  EXPECT_EQ(io::fixed(0.16666, 3), "0.167");
  EXPECT_EQ(io::fixed(-0.0, 2), "0.00");
}

}  // namespace
}  // namespace icsim
