#include "icsim/stylejudge.hpp"

#include <cmath>

#include "icsim/io.hpp"
#include "icsim/text.hpp"

namespace icsim::judge {

std::string build_style_prompt(std::string_view original, std::string_view candidate) {
  if (text::trim(original).empty()) throw InvalidArgument("style prompt: empty original text");
  if (text::trim(candidate).empty()) throw InvalidArgument("style prompt: empty candidate text");
  return "Verify whether two input texts were written by the same author.\n"
         "Analyze writing style only; ignore topic and content.\n"
         "Base your reasoning on linguistic features such as phrasal verbs, modal verbs, punctuation,\n"
         "rare words, affixes, quantities, humor, sarcasm, typographical patterns, and misspellings.\n"
         "\n"
         "Respond on a 1-5 scale (5 = highly likely same author; 1 = highly unlikely).\n"
         "Output JSON only, with keys \"score\" (number) and \"rationale\" (string).\n"
         "\n"
         "Input text 1: " +
         std::string(original) + "\nInput text 2: " + std::string(candidate);
}

StyleVerdict parse_verdict(std::string_view response) {
  const auto obj = io::find_json_object(response);
  if (!obj) throw InvalidArgument("judge response holds no JSON object");
  const auto it = obj->find("score");
  if (it == obj->end()) throw InvalidArgument("judge response has no score");
  double score = 0.0;
  if (it->is_number()) {
    score = it->get<double>();
  } else if (it->is_string()) {
    try {
      std::size_t used = 0;
      const std::string s = it->get<std::string>();
      score = std::stod(s, &used);
      if (used != s.size()) throw InvalidArgument("judge score is not numeric");
    } catch (const std::logic_error&) {
      throw InvalidArgument("judge score is not numeric");
    }
  } else {
    throw InvalidArgument("judge score is not numeric");
  }
  if (!std::isfinite(score) || score < 1.0 || score > 5.0) {
    throw OutOfRange("judge score " + io::fixed(score, 2) + " is outside [1, 5]");
  }
  StyleVerdict v;
  v.score = score;
  if (const auto r = obj->find("rationale"); r != obj->end() && r->is_string()) v.rationale = r->get<std::string>();
  v.raw = std::string(response);
  return v;
}

StyleVerdict judge_style(std::string_view original, std::string_view candidate, providers::TextGenerator& judge,
                         const JudgeConfig& config) {
  if (config.retries < 0) throw InvalidArgument("judge: retries must be >= 0");
  providers::CompletionRequest req;
  req.prompt = build_style_prompt(original, candidate);
  req.max_output_tokens = config.max_output_tokens;
  req.temperature = config.temperature;
  req.seed = 0;
  std::string last_error;
  for (int attempt = 1; attempt <= config.retries + 1; ++attempt) {
    const std::string response = judge.complete(req);
    try {
      StyleVerdict v = parse_verdict(response);
      v.attempts = attempt;
      return v;
    } catch (const OutOfRange&) {
      throw;
    } catch (const InvalidArgument& e) {
      last_error = e.what();
    }
  }
  throw ProviderError(ProviderErrorKind::kBadResponse,
                      "judge: no parseable verdict after " + std::to_string(config.retries + 1) + " attempts (" +
                          last_error + ")");
}

std::string ScoreSummary::cell(int decimals) const {
  return io::fixed(mean, decimals) + "(" + io::fixed(stddev, decimals) + ")";
}

ScoreSummary summarize(const std::vector<double>& scores) {
  if (scores.empty()) throw InvalidArgument("summarize: empty group");
  ScoreSummary s;
  s.count = scores.size();
  double sum = 0.0;
  for (double x : scores) sum += x;
  s.mean = sum / static_cast<double>(scores.size());
  double sq = 0.0;
  for (double x : scores) sq += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(scores.size()));
  return s;
}

std::map<std::string, ScoreSummary> aggregate(const std::vector<std::pair<std::string, double>>& rows) {
  std::map<std::string, std::vector<double>> groups;
  for (const auto& [key, score] : rows) groups[key].push_back(score);
  std::map<std::string, ScoreSummary> out;
  for (const auto& [key, scores] : groups) out.emplace(key, summarize(scores));
  return out;
}

}  // namespace icsim::judge
