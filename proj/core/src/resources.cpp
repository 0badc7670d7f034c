#include "icsim/resources.hpp"

#include "icsim/io.hpp"
#include "icsim/text.hpp"

namespace icsim::resources {
namespace {

constexpr std::string_view kStopwords =
    "a about above after again against all am an and any are as at be because been before being "
    "below between both but by can could did do does doing down during each few for from further "
    "had has have having he her here hers herself him himself his how i if in into is it its itself "
    "just me more most my myself no nor not now of off on once only or other our ours ourselves out "
    "over own same she should so some such than that the their theirs them themselves then there "
    "these they this those through to too under until up very was we were what when where which "
    "while who whom why will with would you your yours yourself yourselves "
    "i'm you're he's she's it's we're they're i've you've we've they've i'd you'd he'd she'd we'd "
    "they'd i'll you'll he'll she'll we'll they'll isn't aren't wasn't weren't hasn't haven't "
    "hadn't doesn't don't didn't won't wouldn't can't cannot couldn't shouldn't let's that's "
    "there's what's who's here's s t d ll m o re ve y";

// word  polarity  subjectivity
constexpr std::string_view kLexicon =
    "good\t0.7\t0.6\n"
    "great\t0.8\t0.75\n"
    "well\t0.4\t0.4\n"
    "fine\t0.4\t0.5\n"
    "nice\t0.6\t1.0\n"
    "kind\t0.6\t0.9\n"
    "happy\t0.8\t1.0\n"
    "glad\t0.5\t1.0\n"
    "warm\t0.6\t0.6\n"
    "bright\t0.7\t0.75\n"
    "beautiful\t0.85\t1.0\n"
    "brave\t0.8\t1.0\n"
    "calm\t0.3\t0.75\n"
    "careful\t0.1\t1.0\n"
    "steady\t0.2\t0.5\n"
    "safe\t0.5\t0.5\n"
    "alive\t0.1\t0.4\n"
    "best\t1.0\t0.3\n"
    "better\t0.5\t0.5\n"
    "love\t0.5\t0.6\n"
    "loves\t0.5\t0.6\n"
    "adores\t0.5\t0.6\n"
    "hope\t0.4\t0.6\n"
    "smile\t0.3\t0.1\n"
    "smiled\t0.3\t0.1\n"
    "smiles\t0.3\t0.1\n"
    "laugh\t0.3\t0.3\n"
    "laughed\t0.3\t0.3\n"
    "worth\t0.3\t0.1\n"
    "loyal\t0.6\t0.8\n"
    "clean\t0.37\t0.65\n"
    "clear\t0.1\t0.38\n"
    "gentle\t0.4\t0.7\n"
    "gently\t0.4\t0.7\n"
    "quiet\t0.1\t0.3\n"
    "quietly\t0.1\t0.3\n"
    "soft\t0.1\t0.4\n"
    "softly\t0.1\t0.4\n"
    "welcome\t0.8\t0.9\n"
    "interested\t0.25\t0.25\n"
    "important\t0.4\t1.0\n"
    "engaging\t0.5\t0.6\n"
    "pretty\t0.25\t1.0\n"
    "perfect\t1.0\t1.0\n"
    "neat\t0.4\t0.6\n"
    "true\t0.35\t0.65\n"
    "free\t0.4\t0.8\n"
    "rich\t0.375\t0.625\n"
    "wonderful\t1.0\t1.0\n"
    "bad\t-0.7\t0.67\n"
    "worse\t-0.4\t0.6\n"
    "worst\t-1.0\t1.0\n"
    "poor\t-0.4\t0.6\n"
    "sad\t-0.5\t1.0\n"
    "angry\t-0.5\t1.0\n"
    "afraid\t-0.6\t0.9\n"
    "fear\t-0.6\t0.8\n"
    "scared\t-0.5\t0.8\n"
    "cold\t-0.6\t1.0\n"
    "dark\t-0.15\t0.4\n"
    "dead\t-0.2\t0.4\n"
    "death\t-0.5\t0.5\n"
    "drowned\t-0.6\t0.4\n"
    "hard\t-0.3\t0.54\n"
    "heavy\t-0.2\t0.5\n"
    "dull\t-0.3\t0.5\n"
    "ashamed\t-0.6\t0.8\n"
    "guilt\t-0.5\t0.7\n"
    "hungry\t-0.2\t0.5\n"
    "broken\t-0.4\t0.4\n"
    "lost\t-0.3\t0.3\n"
    "alone\t-0.2\t0.5\n"
    "strange\t-0.05\t0.15\n"
    "wrong\t-0.5\t0.9\n"
    "mad\t-0.6\t1.0\n"
    "terrible\t-1.0\t1.0\n"
    "awful\t-1.0\t1.0\n"
    "horrible\t-1.0\t1.0\n"
    "cruel\t-1.0\t1.0\n"
    "cruelty\t-0.8\t0.9\n"
    "ugly\t-0.7\t1.0\n"
    "weak\t-0.375\t0.625\n"
    "weaker\t-0.375\t0.625\n"
    "sick\t-0.7\t0.85\n"
    "tired\t-0.4\t0.7\n"
    "boring\t-1.0\t1.0\n"
    "needless\t-0.4\t0.6\n"
    "reluctantly\t-0.3\t0.6\n"
    "white\t0.0\t0.0\n"
    "grey\t-0.1\t0.2\n"
    "silent\t-0.1\t0.4\n"
    "empty\t-0.1\t0.5\n"
    "bare\t-0.1\t0.3\n"
    "thin\t-0.2\t0.4\n"
    "trembling\t-0.3\t0.6\n"
    "shook\t-0.2\t0.4\n"
    "hurt\t-0.6\t0.6\n"
    "pain\t-0.6\t0.6\n"
    "cry\t-0.5\t0.6\n"
    "tears\t-0.4\t0.6\n"
    "danger\t-0.5\t0.6\n"
    "dangerous\t-0.6\t0.9\n"
    "murdered\t-0.8\t0.6\n"
    "killed\t-0.7\t0.5\n"
    "crime\t-0.6\t0.5\n"
    "shame\t-0.6\t0.8\n"
    "quick\t0.33\t0.5\n"
    "slowly\t-0.1\t0.4\n"
    "old\t0.1\t0.2\n"
    "new\t0.14\t0.45\n"
    "small\t-0.25\t0.4\n"
    "little\t-0.19\t0.5\n"
    "big\t0.0\t0.1\n"
    "long\t-0.05\t0.4\n"
    "short\t0.0\t0.3\n"
    "thick\t-0.1\t0.4\n"
    "strong\t0.43\t0.73\n"
    "easy\t0.43\t0.83\n"
    "simple\t0.0\t0.36\n"
    "sure\t0.5\t0.89\n"
    "certain\t0.21\t0.57\n"
    "obvious\t0.0\t0.5\n"
    "surprised\t0.1\t0.8\n"
    "surprise\t0.1\t0.8\n"
    "nightmares\t-0.7\t0.8\n"
    "grit\t0.1\t0.5\n"
    "resilience\t0.5\t0.6\n"
    "patient\t0.4\t0.8\n"
    "curious\t0.1\t1.0\n"
    "dry\t-0.1\t0.4\n"
    "restless\t-0.2\t0.7\n"
    "calmly\t0.3\t0.75\n"
    "complained\t-0.4\t0.6\n"
    "worried\t-0.4\t0.8\n";

}  // namespace

const WordSet& stopwords() {
  static const WordSet words = [] {
    WordSet set;
    std::string_view rest = kStopwords;
    while (!rest.empty()) {
      const auto sp = rest.find(' ');
      const std::string_view w = rest.substr(0, sp);
      if (!w.empty()) set.emplace(w);
      if (sp == std::string_view::npos) break;
      rest.remove_prefix(sp + 1);
    }
    return set;
  }();
  return words;
}

WordSet load_wordlist(const std::filesystem::path& path) {
  WordSet set;
  for (const std::string& line : text::split(io::read_file(path), '\n')) {
    const std::string_view w = text::trim(line);
    if (w.empty() || w.front() == '#') continue;
    set.insert(text::to_lower(w));
  }
  return set;
}

std::string_view default_lexicon_tsv() { return kLexicon; }

}  // namespace icsim::resources
