#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace icsim::features {

enum class Pos { kNoun, kPropn, kVerb, kAux, kAdj, kAdv, kPron, kDet, kAdp, kCconj, kSconj, kPart, kIntj, kNum, kPunct };

inline constexpr std::array<Pos, 15> kAllPos = {Pos::kNoun, Pos::kPropn, Pos::kVerb,  Pos::kAux,  Pos::kAdj,
                                                Pos::kAdv,  Pos::kPron,  Pos::kDet,   Pos::kAdp,  Pos::kCconj,
                                                Pos::kSconj, Pos::kPart, Pos::kIntj,  Pos::kNum,  Pos::kPunct};

std::string_view to_string(Pos pos);

// Tags the tokens of one sentence, in order.
class Tagger {
 public:
  virtual ~Tagger() = default;
  virtual std::vector<Pos> tag(const std::vector<std::string>& sentence_tokens) const = 0;
};

// Closed-class word lists, a small open-class verb list, capitalization, and
// suffix rules. Unknown words default to NOUN.
class HeuristicTagger final : public Tagger {
 public:
  std::vector<Pos> tag(const std::vector<std::string>& sentence_tokens) const override;
  Pos tag_word(std::string_view token, bool sentence_initial) const;
};

const Tagger& default_tagger();

}  // namespace icsim::features
