#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace icsim::text {

struct Span {
  std::size_t offset = 0;
  std::size_t length = 0;

  std::size_t end() const { return offset + length; }
  std::string_view view(std::string_view text) const { return text.substr(offset, length); }
};

// Tokenizer contract. Token counts drive truncation and output budgets, so an
// implementation must be deterministic and must return spans in text order.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<Span> spans(std::string_view text) const = 0;
  virtual std::string name() const = 0;

  std::size_t count(std::string_view text) const { return spans(text).size(); }
  std::vector<std::string> tokenize(std::string_view text) const;
};

// Word runs (letters, digits, internal apostrophes) plus one token per
// punctuation code point. Non-ASCII letters count as word characters.
class WordPunctTokenizer final : public Tokenizer {
 public:
  std::vector<Span> spans(std::string_view text) const override;
  std::string name() const override { return "wordpunct"; }
};

const Tokenizer& default_tokenizer();

// Whitespace-delimited word total.
std::size_t count_words(std::string_view text);

// Sentence spans: a run of . ! ? (plus trailing closing quotes/brackets)
// followed by whitespace ends a sentence, as does a blank line. Spans are
// trimmed and only kept when they contain at least one letter or digit.
std::vector<Span> split_sentences(std::string_view text);

// Lowercased word tokens of the default tokenizer (punctuation dropped).
std::vector<std::string> words(std::string_view text);

bool is_word_token(std::string_view token);

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

// Stable across platforms and runs, unlike std::hash.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t mix(std::uint64_t a, std::uint64_t b);
std::uint64_t splitmix64(std::uint64_t& state);
std::string hex64(std::uint64_t v);

// Decodes one UTF-8 code point at `pos`, advancing it. Invalid bytes decode
// as U+FFFD and advance by one.
char32_t decode_utf8(std::string_view s, std::size_t& pos);
bool is_valid_utf8(std::string_view s);

}  // namespace icsim::text
