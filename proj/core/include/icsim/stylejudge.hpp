#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "icsim/error.hpp"
#include "icsim/providers.hpp"

namespace icsim::judge {

struct StyleVerdict {
  double score = 0.0;  // [1, 5], fractional scores kept
  std::string rationale;
  std::string raw;     // response the verdict was parsed from
  int attempts = 0;
};

struct JudgeConfig {
  int retries = 2;  // extra attempts after a parse failure
  double temperature = 0.0;
  std::size_t max_output_tokens = 512;
};

// Throws InvalidArgument when either text is empty.
std::string build_style_prompt(std::string_view original, std::string_view candidate);

// Parses the first balanced JSON object with a numeric "score". Throws
// InvalidArgument on malformed JSON and OutOfRange on a score outside [1, 5].
StyleVerdict parse_verdict(std::string_view response);

class OutOfRange : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Malformed responses are retried up to config.retries times; an
// out-of-range score is an error straight away.
StyleVerdict judge_style(std::string_view original, std::string_view candidate, providers::TextGenerator& judge,
                         const JudgeConfig& config = {});

struct ScoreSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population

  std::string cell(int decimals = 2) const;  // "3.09(1.67)"
};

// Throws InvalidArgument on an empty list.
ScoreSummary summarize(const std::vector<double>& scores);

// Groups (key, score) rows and summarizes each group, keys in sorted order.
std::map<std::string, ScoreSummary> aggregate(const std::vector<std::pair<std::string, double>>& rows);

}  // namespace icsim::judge
