#include "icsim/tagger.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

#include "icsim/text.hpp"

namespace icsim::features {
namespace {

const std::unordered_map<std::string, Pos>& closed_class() {
  static const auto table = [] {
    std::unordered_map<std::string, Pos> m;
    auto add = [&](Pos pos, std::initializer_list<const char*> words) {
      for (const char* w : words) m.emplace(w, pos);  // first table to claim a word wins
    };
    add(Pos::kDet, {"the", "a", "an", "this", "that", "these", "those", "every", "each", "some", "any", "no",
                    "all", "both", "either", "neither", "another", "such"});
    add(Pos::kPron, {"i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them", "my",
                     "your", "his", "its", "our", "their", "mine", "yours", "hers", "ours", "theirs", "myself",
                     "yourself", "himself", "herself", "itself", "ourselves", "themselves", "who", "whom",
                     "whose", "what", "which", "nobody", "everybody", "somebody", "anybody", "nothing",
                     "something", "everything", "anything", "anyone", "someone", "everyone", "one"});
    add(Pos::kAux, {"am", "is", "are", "was", "were", "be", "been", "being", "have", "has", "had", "do",
                    "does", "did", "will", "would", "shall", "should", "can", "could", "may", "might", "must",
                    "i'm", "it's", "he's", "she's", "that's", "there's", "don't", "didn't", "doesn't",
                    "isn't", "wasn't", "can't", "won't", "couldn't", "wouldn't"});
    add(Pos::kAdp, {"of", "in", "on", "at", "by", "for", "with", "from", "to", "into", "onto", "over",
                    "under", "about", "above", "below", "across", "after", "before", "behind", "between",
                    "through", "during", "against", "among", "toward", "towards", "upon", "within",
                    "without", "off", "out", "up", "down", "near", "past", "like", "beside", "around",
                    "along", "inside", "outside", "beneath"});
    add(Pos::kCconj, {"and", "but", "or", "nor", "yet", "so"});
    add(Pos::kSconj, {"because", "although", "though", "if", "unless", "while", "whereas", "whether", "as",
                      "when", "where", "than", "until", "since"});
    add(Pos::kPart, {"not", "n't", "'s"});
    add(Pos::kIntj, {"oh", "ah", "yes", "hey", "ok", "okay", "alas", "hello", "goodbye"});
    add(Pos::kAdv, {"very", "too", "also", "just", "never", "always", "often", "still", "then", "now",
                    "here", "there", "again", "soon", "even", "only", "quite", "rather", "almost", "ever",
                    "already", "once", "well", "back", "away", "together", "instead", "perhaps", "later",
                    "how", "why", "far", "else", "anyway"});
    add(Pos::kNum, {"two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
                    "twelve", "twenty", "thirty", "forty", "fifty", "hundred", "thousand", "million",
                    "first", "second", "third", "last"});
    add(Pos::kVerb, {"say", "says", "said", "go", "goes", "went", "gone", "get", "gets", "got", "know",
                     "knows", "knew", "think", "thinks", "thought", "see", "sees", "saw", "seen", "look",
                     "looks", "come", "comes", "came", "take", "takes", "took", "make", "makes", "made",
                     "tell", "tells", "told", "find", "finds", "found", "give", "gives", "gave", "put",
                     "puts", "stand", "stood", "sit", "sat", "hear", "heard", "feel", "felt", "keep",
                     "kept", "let", "run", "ran", "hold", "held", "bring", "brought", "begin", "began",
                     "leave", "left", "meet", "met", "pay", "paid", "want", "wants", "need", "needs",
                     "seem", "seems", "wrote", "write", "writes", "read", "reads", "lie", "lies", "lay",
                     "stop", "stops", "fell", "catch", "caught", "became", "become", "grew", "grow"});
    return m;
  }();
  return table;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() + 1 && s.substr(s.size() - suffix.size()) == suffix;
}

Pos by_suffix(std::string_view w) {
  if (ends_with(w, "ly")) return Pos::kAdv;
  for (std::string_view s : {"ing", "ed", "ize", "ise", "ify"}) {
    if (ends_with(w, s)) return Pos::kVerb;
  }
  for (std::string_view s : {"ous", "ful", "ive", "able", "ible", "al", "ic", "less", "ish", "ary"}) {
    if (ends_with(w, s)) return Pos::kAdj;
  }
  return Pos::kNoun;
}

}  // namespace

std::string_view to_string(Pos pos) {
  switch (pos) {
    case Pos::kNoun: return "NOUN";
    case Pos::kPropn: return "PROPN";
    case Pos::kVerb: return "VERB";
    case Pos::kAux: return "AUX";
    case Pos::kAdj: return "ADJ";
    case Pos::kAdv: return "ADV";
    case Pos::kPron: return "PRON";
    case Pos::kDet: return "DET";
    case Pos::kAdp: return "ADP";
    case Pos::kCconj: return "CCONJ";
    case Pos::kSconj: return "SCONJ";
    case Pos::kPart: return "PART";
    case Pos::kIntj: return "INTJ";
    case Pos::kNum: return "NUM";
    case Pos::kPunct: return "PUNCT";
  }
  return "NOUN";
}

Pos HeuristicTagger::tag_word(std::string_view token, bool sentence_initial) const {
  if (!text::is_word_token(token)) return Pos::kPunct;
  if (std::all_of(token.begin(), token.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    return Pos::kNum;
  }
  const std::string lower = text::to_lower(token);
  if (const auto it = closed_class().find(lower); it != closed_class().end()) return it->second;
  const bool capitalized = std::isupper(static_cast<unsigned char>(token.front())) != 0;
  if (capitalized && !sentence_initial) return Pos::kPropn;
  return by_suffix(lower);
}

std::vector<Pos> HeuristicTagger::tag(const std::vector<std::string>& tokens) const {
  std::vector<Pos> out;
  out.reserve(tokens.size());
  bool initial = true;
  for (const std::string& tok : tokens) {
    const Pos p = tag_word(tok, initial);
    out.push_back(p);
    // An opening quote keeps the next word in sentence-initial position.
    if (p != Pos::kPunct) initial = false;
  }
  return out;
}

const Tagger& default_tagger() {
  static const HeuristicTagger instance;
  return instance;
}

}  // namespace icsim::features
