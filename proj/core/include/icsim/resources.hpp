#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>

namespace icsim::resources {

using WordSet = std::unordered_set<std::string>;

// Bundled English stopword list (lowercase).
const WordSet& stopwords();

// One word per line, '#' comments, lowercased on load.
WordSet load_wordlist(const std::filesystem::path& path);

// Bundled sentiment lexicon, tab-separated: word, polarity [-1,1], subjectivity [0,1].
std::string_view default_lexicon_tsv();

}  // namespace icsim::resources
