#include "icsim/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "icsim/error.hpp"

namespace icsim::gen {
namespace {

using Gram = std::vector<std::string_view>;

std::map<Gram, std::size_t> ngram_counts(const std::vector<std::string_view>& toks, int n) {
  std::map<Gram, std::size_t> counts;
  if (toks.size() < static_cast<std::size_t>(n)) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    ++counts[Gram(toks.begin() + static_cast<std::ptrdiff_t>(i), toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

std::vector<std::string_view> views(std::string_view s, const text::Tokenizer& tok) {
  std::vector<std::string_view> out;
  for (const text::Span& sp : tok.spans(s)) out.push_back(sp.view(s));
  return out;
}

bool is_markup_char(char32_t c) {
  if (c < 0x20 && c != '\n' && c != '\t' && c != '\r') return true;
  if (c == 0x7f || c == 0xFFFD) return true;
  switch (c) {
    case '<': case '>': case '[': case ']': case '{': case '}': case '|':
    case '\\': case '^': case '~': case '_': case '=': case '#': case '*':
      return true;
    default:
      return false;
  }
}

bool is_letter(char32_t c) {
  if (c < 0x80) return std::isalpha(static_cast<int>(c)) != 0;
  // Latin-1 supplement letters and everything from Latin Extended upward,
  // minus general punctuation and symbol blocks.
  if (c >= 0x2000 && c <= 0x2BFF) return false;
  if (c >= 0x3000 && c <= 0x303F) return false;
  if (c < 0xC0 || c == 0xD7 || c == 0xF7) return false;
  return true;
}

}  // namespace

double bleu(std::string_view candidate, std::string_view reference, const BleuOptions& options,
            const text::Tokenizer& tokenizer) {
  if (options.max_order < 1) throw InvalidArgument("bleu: max_order must be >= 1");
  if (options.smoothing && !(options.epsilon > 0.0)) throw InvalidArgument("bleu: epsilon must be positive");
  const auto cand = views(candidate, tokenizer);
  const auto ref = views(reference, tokenizer);
  if (cand.empty() || ref.empty()) return 0.0;

  double log_sum = 0.0;
  for (int n = 1; n <= options.max_order; ++n) {
    const auto c_counts = ngram_counts(cand, n);
    const auto r_counts = ngram_counts(ref, n);
    std::size_t total = 0;
    std::size_t matched = 0;
    for (const auto& [gram, count] : c_counts) {
      total += count;
      const auto it = r_counts.find(gram);
      if (it != r_counts.end()) matched += std::min(count, it->second);
    }
    double p = total == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(total);
    if (p == 0.0) {
      if (!options.smoothing) return 0.0;
      p = options.epsilon;
    }
    log_sum += std::log(p);
  }
  const double c = static_cast<double>(cand.size());
  const double r = static_cast<double>(ref.size());
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  const double score = bp * std::exp(log_sum / options.max_order);
  return std::clamp(score, 0.0, 1.0);
}

OutputCheck validate_output(std::string_view s, const OutputCheckOptions& options) {
  if (text::trim(s).empty()) return {false, "empty"};
  std::size_t total = 0;
  std::size_t markup = 0;
  std::size_t non_space = 0;
  std::size_t letters = 0;
  for (std::size_t pos = 0; pos < s.size();) {
    const char32_t c = text::decode_utf8(s, pos);
    ++total;
    if (is_markup_char(c)) ++markup;
    if (c == ' ' || c == '\n' || c == '\t' || c == '\r' || c == 0xA0) continue;
    ++non_space;
    if (is_letter(c)) ++letters;
  }
  if (static_cast<double>(markup) / static_cast<double>(total) > options.max_markup_density) {
    return {false, "markup density"};
  }
  if (non_space == 0 || static_cast<double>(letters) / static_cast<double>(non_space) < options.min_alpha_ratio) {
    return {false, "alphabetic ratio"};
  }
  return {};
}

}  // namespace icsim::gen
