#include "icsim/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "icsim/error.hpp"
#include "icsim/io.hpp"
#include "icsim/text.hpp"

namespace icsim::analysis {

std::vector<int> competition_ranks(const std::vector<double>& values, bool descending) {
  std::vector<int> ranks(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    int better = 0;
    for (double other : values) {
      if (descending ? other > values[i] : other < values[i]) ++better;
    }
    ranks[i] = better + 1;
  }
  return ranks;
}

std::vector<SettingSummary> rank_settings(const std::vector<SettingInput>& settings) {
  std::vector<double> ling, structural;
  for (const auto& s : settings) {
    ling.push_back(s.linguistic_mean);
    structural.push_back(s.structural_mean);
  }
  const auto lr = competition_ranks(ling);
  const auto sr = competition_ranks(structural);
  std::vector<double> avg;
  std::vector<SettingSummary> out;
  for (std::size_t i = 0; i < settings.size(); ++i) {
    SettingSummary s;
    s.name = settings[i].name;
    s.linguistic_mean = settings[i].linguistic_mean;
    s.structural_mean = settings[i].structural_mean;
    s.linguistic_rank = lr[i];
    s.structural_rank = sr[i];
    s.average_rank = (lr[i] + sr[i]) / 2.0;
    avg.push_back(s.average_rank);
    out.push_back(s);
  }
  const auto overall = competition_ranks(avg, false);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].overall_rank = overall[i];
  return out;
}

std::vector<SettingSummary> rank_settings(const std::map<std::string, double>& linguistic,
                                          const std::map<std::string, double>& structural) {
  std::vector<SettingInput> in;
  for (const auto& [name, value] : linguistic) {
    const auto it = structural.find(name);
    if (it == structural.end()) throw InvalidArgument("rank_settings: no structural score for '" + name + "'");
    in.push_back({name, value, it->second});
  }
  for (const auto& [name, value] : structural) {
    if (linguistic.find(name) == linguistic.end()) {
      throw InvalidArgument("rank_settings: no linguistic score for '" + name + "'");
    }
  }
  return rank_settings(in);
}

double lexical_diversity(std::string_view s, std::size_t window) {
  if (window == 0) throw InvalidArgument("lexical_diversity: window must be positive");
  const auto tokens = text::words(s);
  if (tokens.empty()) throw InvalidArgument("lexical_diversity: no tokens");
  if (tokens.size() <= window) {
    const std::set<std::string> types(tokens.begin(), tokens.end());
    return static_cast<double>(types.size()) / static_cast<double>(tokens.size());
  }
  std::unordered_map<std::string, std::size_t> counts;
  for (std::size_t i = 0; i < window; ++i) ++counts[tokens[i]];
  double sum = static_cast<double>(counts.size()) / static_cast<double>(window);
  const std::size_t windows = tokens.size() - window + 1;
  for (std::size_t start = 1; start < windows; ++start) {
    const auto& out = tokens[start - 1];
    if (--counts[out] == 0) counts.erase(out);
    ++counts[tokens[start + window - 1]];
    sum += static_cast<double>(counts.size()) / static_cast<double>(window);
  }
  return sum / static_cast<double>(windows);
}

double sentiment_delta(std::string_view generated, std::string_view ground_truth,
                       const features::SentimentLexicon& lexicon) {
  return std::abs(features::polarity_subjectivity(generated, lexicon).first -
                  features::polarity_subjectivity(ground_truth, lexicon).first);
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double sq = 0.0;
  for (double x : v) sq += (x - mean) * (x - mean);
  return {mean, std::sqrt(sq / static_cast<double>(v.size()))};
}

bool word_byte(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool mentions(const std::string& haystack, const std::string& needle) {
  for (std::size_t pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) {
    const bool left = pos == 0 || !word_byte(haystack[pos - 1]);
    const std::size_t end = pos + needle.size();
    const bool right = end >= haystack.size() || !word_byte(haystack[end]);
    if (left && right) return true;
  }
  return false;
}

}  // namespace

SentenceLengthProfile sentence_length_profile(std::string_view s, std::size_t bin_width) {
  if (bin_width == 0) throw InvalidArgument("sentence_length_profile: bin width must be positive");
  SentenceLengthProfile p;
  p.bin_width = bin_width;
  std::vector<double> lens;
  for (const text::Span& span : text::split_sentences(s)) {
    const std::size_t n = text::count_words(span.view(s));
    p.lengths.push_back(n);
    lens.push_back(static_cast<double>(n));
    const std::size_t bin = n == 0 ? 0 : (n - 1) / bin_width;
    if (p.histogram.size() <= bin) p.histogram.resize(bin + 1, 0);
    ++p.histogram[bin];
  }
  std::tie(p.mean, p.stddev) = mean_std(lens);
  return p;
}

std::size_t character_overlap(std::string_view generated, const structsim::AliasMap& aliases) {
  if (aliases.size() == 0) throw InvalidArgument("character_overlap: empty alias inventory");
  const std::string hay = text::to_lower(generated);
  std::size_t count = 0;
  for (const auto& [canonical, names] : aliases.entries()) {
    for (const auto& name : names) {
      if (mentions(hay, name)) {
        ++count;
        break;
      }
    }
  }
  return count;
}

std::size_t event_overlap(const std::vector<structsim::Event>& generated, const std::vector<structsim::Event>& truth,
                          structsim::EventScorer& scorer, double threshold) {
  structsim::Matrix s(truth.size(), std::vector<double>(generated.size(), 0.0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (std::size_t j = 0; j < generated.size(); ++j) {
      s[i][j] = scorer.semantic_similarity(truth[i].description, generated[j].description);
    }
  }
  return structsim::greedy_match_count(s, threshold);
}

std::string signed_delta(double value, int decimals) {
  const std::string body = io::fixed(std::abs(value), decimals);
  const bool zero = io::fixed(0.0, decimals) == body;
  return (value < 0 && !zero ? "-" : "+") + body;
}

namespace {

struct Column {
  std::vector<double> values;
  bool empty() const { return values.empty(); }
};

std::string cell_or_dash(const Column& c, int decimals, bool want_std) {
  if (c.empty()) return "";
  const auto [m, sd] = mean_std(c.values);
  return io::fixed(want_std ? sd : m, decimals);
}

std::string md_cell(const Column& c, int decimals) {
  if (c.empty()) return "-";
  const auto [m, sd] = mean_std(c.values);
  return io::fixed(m, decimals) + "(" + io::fixed(sd, decimals) + ")";
}

}  // namespace

ReportFiles render_report(const ReportInput& in) {
  bool any = false;
  for (const auto& r : in.rows) any = any || r.style || r.structural;
  if (!any) throw InvalidArgument("report: no completed scoring pass");

  std::map<ConditionId, Column> style, structural, diversity, diversity_delta, sentiment, lengths, characters,
      events;
  std::map<ConditionId, std::size_t> candidates;
  std::map<std::string, Column> model_style, model_structural;
  std::map<std::string, std::size_t> model_candidates;
  std::map<std::string, double> truth_diversity;
  for (const auto& t : in.truth) truth_diversity[t.novel_id] = t.lexical_diversity;

  for (const auto& r : in.rows) {
    ++candidates[r.condition];
    ++model_candidates[r.model_id];
    if (r.style) {
      style[r.condition].values.push_back(*r.style);
      model_style[r.model_id].values.push_back(*r.style);
    }
    if (r.structural) {
      structural[r.condition].values.push_back(*r.structural);
      model_structural[r.model_id].values.push_back(*r.structural);
    }
    diversity[r.condition].values.push_back(r.lexical_diversity);
    if (const auto it = truth_diversity.find(r.novel_id); it != truth_diversity.end()) {
      diversity_delta[r.condition].values.push_back(r.lexical_diversity - it->second);
    }
    sentiment[r.condition].values.push_back(r.sentiment_delta);
    for (std::size_t n : r.sentence_lengths) lengths[r.condition].values.push_back(static_cast<double>(n));
    characters[r.condition].values.push_back(static_cast<double>(r.character_overlap));
    events[r.condition].values.push_back(static_cast<double>(r.event_overlap));
  }

  // Ranks cover the conditions that have both scores.
  std::vector<SettingInput> rankable;
  for (ConditionId c : in.conditions) {
    if (!style[c].empty() && !structural[c].empty()) {
      rankable.push_back({std::string(features::display_name(c)), mean_std(style[c].values).first,
                          mean_std(structural[c].values).first});
    }
  }
  std::map<std::string, SettingSummary> ranked;
  for (const auto& s : rank_settings(rankable)) ranked[s.name] = s;

  std::vector<double> human_overall;
  std::vector<ConditionId> human_order;
  for (ConditionId c : in.conditions) {
    if (const auto it = in.human.find(c); it != in.human.end()) {
      human_overall.push_back(it->second.overall.mean);
      human_order.push_back(c);
    }
  }
  std::map<ConditionId, int> human_rank;
  const auto hr = competition_ranks(human_overall);
  for (std::size_t i = 0; i < human_order.size(); ++i) human_rank[human_order[i]] = hr[i];

  ReportFiles f;
  {
    std::string& out = f.combined_csv;
    out = io::csv_row({"Setting", "LinguisticMean", "LinguisticStd", "StructuralMean", "StructuralStd", "Candidates",
                       "HumanLinguistic", "HumanLinguisticStd", "HumanStructure", "HumanStructureStd", "HumanOverall",
                       "HumanOverallStd", "LinguisticRank", "StructuralRank", "LLMRank", "HumanRank"});
    for (ConditionId c : in.conditions) {
      const std::string name(features::display_name(c));
      std::vector<std::string> row = {name,
                                      cell_or_dash(style[c], 2, false),
                                      cell_or_dash(style[c], 2, true),
                                      cell_or_dash(structural[c], 3, false),
                                      cell_or_dash(structural[c], 3, true),
                                      std::to_string(candidates[c])};
      if (const auto it = in.human.find(c); it != in.human.end()) {
        for (const auto* s : {&it->second.linguistic, &it->second.structure, &it->second.overall}) {
          row.push_back(io::fixed(s->mean, 2));
          row.push_back(io::fixed(s->stddev, 2));
        }
      } else {
        row.insert(row.end(), 6, "");
      }
      if (const auto it = ranked.find(name); it != ranked.end()) {
        row.push_back(std::to_string(it->second.linguistic_rank));
        row.push_back(std::to_string(it->second.structural_rank));
        row.push_back(std::to_string(it->second.overall_rank));
      } else {
        row.insert(row.end(), 3, "");
      }
      row.push_back(human_rank.count(c) ? std::to_string(human_rank[c]) : "");
      out += io::csv_row(row);
    }
  }

  std::vector<std::string> models;
  for (const auto& [m, n] : model_candidates) models.push_back(m);
  std::vector<double> mls, mss;
  for (const auto& m : models) {
    mls.push_back(model_style[m].empty() ? -1.0 : mean_std(model_style[m].values).first);
    mss.push_back(model_structural[m].empty() ? -1.0 : mean_std(model_structural[m].values).first);
  }
  const auto mlr = competition_ranks(mls);
  const auto msr = competition_ranks(mss);
  std::vector<std::size_t> model_order(models.size());
  std::iota(model_order.begin(), model_order.end(), 0);
  std::stable_sort(model_order.begin(), model_order.end(),
                   [&](std::size_t a, std::size_t b) { return mlr[a] < mlr[b]; });
  f.models_csv = io::csv_row({"Model", "LinguisticRank", "LinguisticMean", "LinguisticStd", "StructuralRank",
                              "StructuralMean", "StructuralStd", "Candidates"});
  for (std::size_t i : model_order) {
    const auto& m = models[i];
    f.models_csv += io::csv_row({m, model_style[m].empty() ? "" : std::to_string(mlr[i]),
                                 cell_or_dash(model_style[m], 2, false), cell_or_dash(model_style[m], 2, true),
                                 model_structural[m].empty() ? "" : std::to_string(msr[i]),
                                 cell_or_dash(model_structural[m], 3, false),
                                 cell_or_dash(model_structural[m], 3, true), std::to_string(model_candidates[m])});
  }

  Column truth_div, truth_len;
  for (const auto& t : in.truth) {
    truth_div.values.push_back(t.lexical_diversity);
    for (std::size_t n : t.sentence_lengths) truth_len.values.push_back(static_cast<double>(n));
  }
  f.linguistic_csv = io::csv_row({"Setting", "LexicalDiversity", "LexicalDiversityDelta", "SentimentDelta",
                                  "SentenceLengthMean", "SentenceLengthStd", "Candidates"});
  f.linguistic_csv += io::csv_row({"Ground truth", cell_or_dash(truth_div, 4, false), "", "",
                                   cell_or_dash(truth_len, 2, false), cell_or_dash(truth_len, 2, true),
                                   std::to_string(in.truth.size())});
  for (ConditionId c : in.conditions) {
    f.linguistic_csv += io::csv_row(
        {std::string(features::display_name(c)), cell_or_dash(diversity[c], 4, false),
         diversity_delta[c].empty() ? "" : signed_delta(mean_std(diversity_delta[c].values).first),
         sentiment[c].empty() ? "" : signed_delta(mean_std(sentiment[c].values).first),
         cell_or_dash(lengths[c], 2, false), cell_or_dash(lengths[c], 2, true), std::to_string(candidates[c])});
  }

  const std::size_t width = 5;
  auto histogram_rows = [&](const std::string& name, const Column& col) {
    std::vector<std::size_t> bins;
    for (double x : col.values) {
      const auto n = static_cast<std::size_t>(x);
      const std::size_t b = n == 0 ? 0 : (n - 1) / width;
      if (bins.size() <= b) bins.resize(b + 1, 0);
      ++bins[b];
    }
    std::string out;
    for (std::size_t b = 0; b < bins.size(); ++b) {
      out += io::csv_row({name, std::to_string(b * width + 1), std::to_string((b + 1) * width),
                          io::fixed(static_cast<double>(bins[b]) / static_cast<double>(col.values.size()), 4)});
    }
    return out;
  };
  f.sentence_lengths_csv = io::csv_row({"Setting", "BinStart", "BinEnd", "Share"});
  f.sentence_lengths_csv += histogram_rows("Ground truth", truth_len);
  for (ConditionId c : in.conditions) {
    f.sentence_lengths_csv += histogram_rows(std::string(features::display_name(c)), lengths[c]);
  }

  f.overlap_csv = io::csv_row({"Setting", "Novel", "CharacterOverlap", "EventOverlap", "EventReview"});
  for (ConditionId c : in.conditions) {
    const std::string name(features::display_name(c));
    std::map<std::string, std::pair<Column, Column>> per_novel;
    for (const auto& r : in.rows) {
      if (r.condition != c) continue;
      per_novel[r.novel_id].first.values.push_back(static_cast<double>(r.character_overlap));
      per_novel[r.novel_id].second.values.push_back(static_cast<double>(r.event_overlap));
    }
    for (const auto& [novel, cols] : per_novel) {
      f.overlap_csv += io::csv_row(
          {name, novel, cell_or_dash(cols.first, 2, false), cell_or_dash(cols.second, 2, false), "unreviewed"});
    }
    f.overlap_csv += io::csv_row(
        {name, "all", cell_or_dash(characters[c], 2, false), cell_or_dash(events[c], 2, false), "unreviewed"});
  }

  std::ostringstream md;
  md << "# icsim report\n\n";
  for (const auto& note : in.notes) md << "- " << note << "\n";
  if (!in.notes.empty()) md << "\n";
  md << "## Conditions\n\n";
  md << "| Setting | Linguistic | Structural | Human ling. | Human struct. | Human overall | LLM rank | Human rank |\n";
  md << "|---|---|---|---|---|---|---|---|\n";
  std::optional<std::string> best;
  int best_rank = 0;
  for (ConditionId c : in.conditions) {
    const std::string name(features::display_name(c));
    md << "| " << name << " | " << md_cell(style[c], 2) << " | " << md_cell(structural[c], 3) << " | ";
    if (const auto it = in.human.find(c); it != in.human.end()) {
      md << it->second.linguistic.cell() << " | " << it->second.structure.cell() << " | "
         << it->second.overall.cell() << " | ";
    } else {
      md << "- | - | - | ";
    }
    if (const auto it = ranked.find(name); it != ranked.end()) {
      md << it->second.overall_rank;
      if (!best || it->second.overall_rank < best_rank) {
        best = name;
        best_rank = it->second.overall_rank;
      }
    } else {
      md << "-";
    }
    md << " | " << (human_rank.count(c) ? std::to_string(human_rank[c]) : "-") << " |\n";
  }
  if (best) md << "\nBest LLM-judged setting: " << *best << ".\n";
  md << "\n## Models\n\n| Model | Linguistic rank | Linguistic | Structural rank | Structural |\n";
  md << "|---|---|---|---|---|\n";
  for (std::size_t i : model_order) {
    const auto& m = models[i];
    md << "| " << m << " | " << (model_style[m].empty() ? "-" : std::to_string(mlr[i])) << " | "
       << md_cell(model_style[m], 2) << " | " << (model_structural[m].empty() ? "-" : std::to_string(msr[i]))
       << " | " << md_cell(model_structural[m], 3) << " |\n";
  }
  md << "\n## Gaps\n\n";
  if (in.gaps.empty()) {
    md << "None.\n";
  } else {
    for (const auto& g : in.gaps) {
      md << "- " << g.novel_id << " / " << g.model_id << " / " << features::display_name(g.condition) << "\n";
    }
  }
  md << "\nEvent-overlap counts are similarity-thresholded and unreviewed.\n";
  f.summary_md = md.str();
  return f;
}

void write_report(const ReportFiles& f, const fs::path& dir) {
  fs::create_directories(dir);
  io::write_file_atomic(dir / "combined.csv", f.combined_csv);
  io::write_file_atomic(dir / "models.csv", f.models_csv);
  io::write_file_atomic(dir / "linguistic_analysis.csv", f.linguistic_csv);
  io::write_file_atomic(dir / "sentence_lengths.csv", f.sentence_lengths_csv);
  io::write_file_atomic(dir / "overlap.csv", f.overlap_csv);
  io::write_file_atomic(dir / "summary.md", f.summary_md);
}

}  // namespace icsim::analysis
