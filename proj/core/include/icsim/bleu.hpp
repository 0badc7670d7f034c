#pragma once

#include <string>
#include <string_view>

#include "icsim/text.hpp"

namespace icsim::gen {

struct BleuOptions {
  int max_order = 4;
  // A zero n-gram precision is replaced by `epsilon` instead of zeroing the score.
  bool smoothing = true;
  double epsilon = 1e-9;
};

// Sentence-level BLEU over default-tokenizer tokens (case preserved): clipped
// n-gram precisions up to max_order, geometric mean, brevity penalty. An
// empty candidate or reference scores 0.
double bleu(std::string_view candidate, std::string_view reference, const BleuOptions& options = {},
            const text::Tokenizer& tokenizer = text::default_tokenizer());

struct OutputCheckOptions {
  double max_markup_density = 0.05;
  double min_alpha_ratio = 0.6;
};

struct OutputCheck {
  bool wellformed = true;
  std::string reason;  // empty when wellformed
};

// Malformed when empty after trimming, when markup/control characters exceed
// the density limit, or when too few non-space characters are letters.
OutputCheck validate_output(std::string_view text, const OutputCheckOptions& options = {});

}  // namespace icsim::gen
