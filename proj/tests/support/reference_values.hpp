#pragma once

// Reported aggregate values replayed by the ranking, pretest and aggregation
// tests. Means and stds are as printed (two or three decimals).

#include <array>
#include <string_view>

namespace icsim::testing {

struct ReferenceSetting {
  std::string_view name;
  double linguistic;  // judge style mean, 1-5
  double structural;  // structural similarity mean, 0-1
  double human_linguistic, human_linguistic_std;
  double human_structure, human_structure_std;
  double human_overall;
  int llm_rank;
  int human_rank;
};

inline constexpr std::array<ReferenceSetting, 11> kReferenceSettings = {{
    {"Profile", 3.09, 0.107, 2.40, 1.36, 1.70, 0.81, 2.00, 2, 5},
    {"Background", 2.94, 0.055, 2.00, 1.26, 1.40, 0.66, 1.60, 7, 10},
    {"Concept", 2.94, 0.103, 2.80, 1.10, 1.60, 0.98, 2.40, 5, 2},
    {"Base", 2.91, 0.098, 2.40, 1.10, 1.40, 0.49, 1.70, 6, 7},
    {"Linguistic", 2.83, 0.113, 2.60, 1.19, 1.80, 1.00, 2.20, 3, 4},
    {"BigO Personality", 2.71, 0.126, 2.00, 0.83, 1.70, 0.65, 1.70, 3, 7},
    {"Persona", 2.66, 0.112, 2.90, 1.11, 1.80, 0.78, 2.40, 7, 2},
    {"Concept + Linguistic", 3.06, 0.167, 3.40, 1.19, 2.60, 0.80, 2.90, 1, 1},
    {"Concept + Profile", 2.83, 0.084, 2.60, 0.99, 1.20, 0.50, 1.90, 10, 6},
    {"Profile + Linguistic", 2.66, 0.090, 2.40, 1.00, 1.20, 0.30, 1.70, 11, 7},
    {"Profile + Concept + Linguistic", 2.51, 0.122, 1.60, 1.02, 1.20, 0.40, 1.40, 7, 11},
}};

struct ReferenceModel {
  std::string_view name;
  int linguistic_rank;
  double linguistic, linguistic_std;
  int structural_rank;
  double structural, structural_std;
};

inline constexpr std::array<ReferenceModel, 7> kReferenceModels = {{
    {"Gemini Pro 1.5", 1, 3.46, 1.57, 2, 0.123, 0.231},
    {"Qwen-1.5 7B", 2, 3.42, 1.51, 7, 0.068, 0.164},
    {"Llama-3.2 3B", 3, 3.18, 1.47, 1, 0.144, 0.241},
    {"Llama-3.2 1B", 4, 3.00, 1.44, 6, 0.094, 0.196},
    {"Qwen-1.5 4B", 5, 2.62, 1.50, 4, 0.101, 0.221},
    {"Qwen-1.5 1.8B", 6, 2.18, 1.29, 3, 0.117, 0.232},
    {"Gemma-7B", 7, 2.11, 1.38, 5, 0.096, 0.211},
}};

struct ReferenceBleu {
  std::string_view model;
  double mean, stddev, max, min;
  int responses;  // out of 550
};

inline constexpr std::array<ReferenceBleu, 8> kReferenceBleu = {{
    {"Qwen1.5-4B", 0.0013, 0.0005, 0.0067, 0.0, 550},
    {"Qwen1.5-7B", 0.0013, 0.0006, 0.0072, 0.0, 550},
    {"Qwen1.5-1.8B", 0.0011, 0.0009, 0.0080, 0.0, 550},
    {"Gemma-7B", 0.0008, 0.0007, 0.0051, 0.0, 540},
    {"Llama-3.2-3B", 0.0007, 0.0004, 0.0027, 0.0, 550},
    {"Llama-3.2-1B", 0.0005, 0.0003, 0.0037, 0.0, 550},
    {"Gemini-Pro-1.5", 0.0001, 0.0001, 0.0009, 0.0, 550},
    {"Gemma-2B", 0.0000, 0.0001, 0.0007, 0.0, 540},
}};

}  // namespace icsim::testing
