#include "icsim/stub_providers.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "icsim/error.hpp"
#include "icsim/io.hpp"
#include "icsim/resources.hpp"
#include "icsim/text.hpp"

namespace icsim::providers {
namespace {

constexpr std::string_view kJudgeFirst = "Input text 1: ";
constexpr std::string_view kJudgeSecond = "\nInput text 2: ";
constexpr std::string_view kExtractMarker = "\nTEXT:\n";

constexpr std::array<std::string_view, 24> kLorem = {
    "lorem", "ipsum", "dolor", "sit",    "amet",   "consectetur", "adipiscing", "elit",
    "sed",   "do",    "eiusmod", "tempor", "incididunt", "ut",   "labore",   "et",
    "dolore", "magna", "aliqua", "enim",  "minim",  "veniam",     "quis",       "nostrud"};

constexpr std::array<std::string_view, 48> kFunctionWords = {
    "the",   "a",     "an",   "and",  "but",   "or",    "of",    "to",    "in",    "on",    "at",    "by",
    "for",   "with",  "from", "as",   "that",  "this",  "it",    "he",    "she",   "they",  "i",     "you",
    "we",    "his",   "her",  "their", "was",  "is",    "had",   "has",   "be",    "not",   "no",    "if",
    "then",  "so",    "when", "there", "what", "would", "could", "will",  "very",  "all",   "one",   "said"};

constexpr std::string_view kPunct = ",.;:!?\"'-()";

std::uint64_t request_state(const CompletionRequest& req, std::string_view variant) {
  return text::mix(text::fnv1a(req.prompt, text::fnv1a(variant)), req.seed.value_or(0));
}

std::size_t draw(std::uint64_t& state, std::size_t bound) {
  return bound == 0 ? 0 : static_cast<std::size_t>(text::splitmix64(state) % bound);
}

// Prompt instructions and feature blocks, as opposed to story text.
bool scaffolding(std::string_view sentence) {
  if (sentence.find_first_of(":`#") != std::string_view::npos) return true;
  const std::string lower = text::to_lower(sentence);
  for (std::string_view w : {"narration", "novel", "author", "continu", "style", "persona", "profile", "concept",
                             "linguistic", "personality", "background", "chapter"}) {
    if (lower.find(w) != std::string::npos) return true;
  }
  return false;
}

std::string echo(const CompletionRequest& req) {
  std::uint64_t state = request_state(req, "echo");
  const std::string_view prompt = req.prompt;
  std::vector<std::string_view> sentences;
  for (const text::Span& s : text::split_sentences(prompt)) {
    const std::string_view piece = s.view(prompt);
    if (text::count_words(piece) >= 4 && !scaffolding(piece)) sentences.push_back(piece);
  }
  for (std::size_t i = sentences.size(); i > 1; --i) std::swap(sentences[i - 1], sentences[draw(state, i)]);
  const std::size_t target = std::min<std::size_t>(req.max_output_tokens, 150 + draw(state, 100));
  std::string out;
  std::size_t used = 0;
  for (std::string_view s : sentences) {
    const std::size_t cost = text::default_tokenizer().count(s);
    if (used + cost > target) continue;
    if (!out.empty()) out += ' ';
    out += s;
    used += cost;
  }
  return out;
}

std::string lorem(const CompletionRequest& req) {
  std::uint64_t state = request_state(req, "lorem");
  const std::size_t n = std::min<std::size_t>(req.max_output_tokens, 40 + draw(state, 120));
  std::string out;
  std::size_t in_sentence = 0;
  std::size_t sentence_len = 6 + draw(state, 7);
  for (std::size_t i = 0; i < n; ++i) {
    std::string w(kLorem[draw(state, kLorem.size())]);
    if (in_sentence == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    if (!out.empty()) out += ' ';
    out += w;
    if (++in_sentence == sentence_len || i + 1 == n) {
      out += '.';
      in_sentence = 0;
      sentence_len = 6 + draw(state, 7);
    }
  }
  return out;
}

std::string garbage(const CompletionRequest& req) {
  std::uint64_t state = request_state(req, "garbage");
  static constexpr std::array<std::string_view, 10> kBits = {"<h3>", ">", "]", " ]:", " the", " ,", " '", "]ES'",
                                                            " a", "m:body"};
  std::string out;
  const std::size_t n = std::min<std::size_t>(req.max_output_tokens, 30 + draw(state, 30));
  for (std::size_t i = 0; i < n; ++i) out += kBits[draw(state, kBits.size())];
  return out;
}

std::string judge(const CompletionRequest& req) {
  const std::string_view prompt = req.prompt;
  const auto first = prompt.find(kJudgeFirst);
  const auto second = prompt.find(kJudgeSecond, first == std::string_view::npos ? 0 : first);
  if (first == std::string_view::npos || second == std::string_view::npos) {
    return "I can only compare two texts.";
  }
  const std::string_view a = prompt.substr(first + kJudgeFirst.size(), second - first - kJudgeFirst.size());
  const std::string_view b = prompt.substr(second + kJudgeSecond.size());
  const double affinity = stylistic_affinity(a, b);
  const double scaled = std::clamp((affinity - 0.6) / 0.4, 0.0, 1.0);
  const int score = static_cast<int>(std::lround(1.0 + 4.0 * scaled));
  nlohmann::json verdict = {{"score", score},
                            {"rationale", "function-word and punctuation profile affinity " + io::fixed(affinity, 3)}};
  return verdict.dump();
}

std::string extractor(const CompletionRequest& req) {
  const std::string_view prompt = req.prompt;
  const auto at = prompt.rfind(kExtractMarker);
  const std::string_view passage = at == std::string_view::npos ? prompt : prompt.substr(at + kExtractMarker.size());
  return heuristic_events(passage).dump();
}

bool is_capitalized(std::string_view tok) {
  return !tok.empty() && std::isupper(static_cast<unsigned char>(tok[0])) != 0 &&
         std::all_of(tok.begin(), tok.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '\''; });
}

}  // namespace

StubGenerator::StubGenerator(std::string variant, const ProviderConfig& config)
    : variant_(std::move(variant)), gate_(config.max_in_flight, config.rate_per_second) {
  static const std::set<std::string> kKnown = {"echo", "lorem", "empty", "garbage", "judge", "extractor", "scripted"};
  if (!kKnown.contains(variant_)) throw ConfigError("unknown stub variant '" + variant_ + "'");
  if (variant_ == "scripted") {
    for (const auto& r : config.options.value("responses", nlohmann::json::array())) {
      scripted_.push_back(r.get<std::string>());
    }
    if (scripted_.empty()) throw ConfigError("stub:scripted needs options.responses");
  }
}

std::string StubGenerator::complete(const CompletionRequest& request) {
  validate(request);
  const auto ticket = gate_.acquire();
  if (variant_ == "echo") return echo(request);
  if (variant_ == "lorem") return lorem(request);
  if (variant_ == "empty") return {};
  if (variant_ == "garbage") return garbage(request);
  if (variant_ == "judge") return judge(request);
  if (variant_ == "extractor") return extractor(request);
  return scripted_[cursor_.fetch_add(1) % scripted_.size()];
}

HashEmbedder::HashEmbedder(std::size_t dimension, std::uint64_t seed) : dimension_(dimension), seed_(seed) {
  if (dimension_ == 0) throw ConfigError("embedding dimension must be positive");
}

std::size_t HashEmbedder::bucket(std::string_view token) const {
  return static_cast<std::size_t>(text::mix(text::fnv1a(token), seed_) % dimension_);
}

EmbeddingVector HashEmbedder::embed(std::string_view input) {
  EmbeddingVector v;
  v.values.assign(dimension_, 0.0);
  for (const std::string& w : text::words(input)) v.values[bucket(w)] += 1.0;
  double norm = 0.0;
  for (double x : v.values) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v.values) x /= norm;
  }
  return v;
}

nlohmann::json heuristic_events(std::string_view passage, std::size_t max_events) {
  const auto& stop = resources::stopwords();
  const auto sentences = text::split_sentences(passage);

  // Capitalized words seen away from sentence starts are treated as names.
  std::set<std::string> names;
  for (const text::Span& s : sentences) {
    const auto toks = text::default_tokenizer().tokenize(s.view(passage));
    for (std::size_t i = 1; i < toks.size(); ++i) {
      const bool after_quote = toks[i - 1] == "\"" || toks[i - 1] == "\xE2\x80\x9C";
      if (is_capitalized(toks[i]) && !after_quote && !stop.contains(text::to_lower(toks[i]))) names.insert(toks[i]);
    }
  }

  static constexpr std::array<std::string_view, 12> kPreps = {"in",   "at",    "into",  "inside", "on",     "under",
                                                              "by",   "across", "toward", "towards", "onto", "behind"};
  nlohmann::json events = nlohmann::json::array();
  for (const text::Span& s : sentences) {
    if (events.size() >= max_events) break;
    const std::string_view sentence = s.view(passage);
    const auto toks = text::default_tokenizer().tokenize(sentence);
    std::vector<std::string> chars;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (!names.contains(toks[i])) continue;
      std::string name = toks[i];
      while (i + 1 < toks.size() && names.contains(toks[i + 1])) name += " " + toks[++i];
      if (std::find(chars.begin(), chars.end(), name) == chars.end()) chars.push_back(name);
    }
    if (chars.empty()) continue;

    std::string location;
    for (std::size_t i = 0; i + 2 < toks.size() && location.empty(); ++i) {
      const std::string lower = text::to_lower(toks[i]);
      if (std::find(kPreps.begin(), kPreps.end(), lower) == kPreps.end() || text::to_lower(toks[i + 1]) != "the") continue;
      std::vector<std::string> phrase;
      for (std::size_t k = i + 2; k < toks.size() && phrase.size() < 2; ++k) {
        const std::string w = text::to_lower(toks[k]);
        if (!text::is_word_token(w) || stop.contains(w)) break;
        phrase.push_back(w);
      }
      location = text::join(phrase, " ");
    }

    std::vector<std::string> desc_words;
    for (const std::string& w : text::split(sentence, ' ')) {
      if (text::trim(w).empty()) continue;
      if (desc_words.size() == 40) break;
      desc_words.emplace_back(text::trim(w));
    }
    events.push_back({{"characters", chars}, {"location", location}, {"description", text::join(desc_words, " ")}});
  }
  return nlohmann::json{{"events", events}};
}

double stylistic_affinity(std::string_view a, std::string_view b) {
  auto profile = [](std::string_view t) {
    std::vector<double> v(kFunctionWords.size() + kPunct.size(), 0.0);
    const auto toks = text::default_tokenizer().tokenize(t);
    for (const std::string& tok : toks) {
      const std::string lower = text::to_lower(tok);
      const auto fw = std::find(kFunctionWords.begin(), kFunctionWords.end(), lower);
      if (fw != kFunctionWords.end()) v[static_cast<std::size_t>(fw - kFunctionWords.begin())] += 1.0;
      if (tok.size() == 1) {
        const auto p = kPunct.find(tok[0]);
        if (p != std::string_view::npos) v[kFunctionWords.size() + p] += 1.0;
      }
    }
    return v;
  };
  const auto va = profile(a);
  const auto vb = profile(b);
  const double dot = std::inner_product(va.begin(), va.end(), vb.begin(), 0.0);
  const double na = std::sqrt(std::inner_product(va.begin(), va.end(), va.begin(), 0.0));
  const double nb = std::sqrt(std::inner_product(vb.begin(), vb.end(), vb.begin(), 0.0));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (na * nb), 0.0, 1.0);
}

}  // namespace icsim::providers
