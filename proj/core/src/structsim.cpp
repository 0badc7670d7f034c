#include "icsim/structsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include <spdlog/spdlog.h>

#include "icsim/error.hpp"
#include "icsim/io.hpp"
#include "icsim/text.hpp"

namespace icsim::structsim {

nlohmann::json Event::to_json() const {
  return {{"characters", characters}, {"location", location}, {"description", description}};
}

Event Event::from_json(const nlohmann::json& j) {
  Event e;
  if (const auto it = j.find("characters"); it != j.end() && !it->is_null()) {
    if (it->is_string()) {
      e.characters.push_back(it->get<std::string>());
    } else {
      for (const auto& c : *it) {
        if (c.is_string()) e.characters.push_back(c.get<std::string>());
      }
    }
  }
  for (auto& c : e.characters) c = std::string(text::trim(c));
  e.characters.erase(std::remove(e.characters.begin(), e.characters.end(), std::string{}), e.characters.end());
  if (const auto it = j.find("location"); it != j.end() && it->is_string()) {
    e.location = std::string(text::trim(it->get<std::string>()));
  }
  if (const auto it = j.find("description"); it != j.end() && it->is_string()) {
    e.description = std::string(text::trim(it->get<std::string>()));
  }
  return e;
}

AliasMap AliasMap::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("alias map: expected an object of canonical -> [aliases]");
  AliasMap m;
  for (const auto& [canonical, aliases] : j.items()) {
    if (!aliases.is_array()) throw InvalidArgument("alias map: aliases of '" + canonical + "' must be an array");
    m.add(canonical, aliases.get<std::vector<std::string>>());
  }
  return m;
}

AliasMap AliasMap::load(const fs::path& path) {
  const std::string content = io::read_file(path);
  try {
    return from_json(nlohmann::json::parse(content));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

void AliasMap::add(std::string_view canonical_raw, const std::vector<std::string>& aliases) {
  const std::string canonical = text::to_lower(text::trim(canonical_raw));
  if (canonical.empty()) throw InvalidArgument("alias map: empty canonical name");
  auto& set = canonical_[canonical];
  auto claim = [&](const std::string& alias) {
    const auto [it, inserted] = alias_to_canonical_.emplace(alias, canonical);
    if (!inserted && it->second != canonical) {
      throw InvalidArgument("alias map: '" + alias + "' belongs to both '" + it->second + "' and '" + canonical + "'");
    }
    set.insert(alias);
  };
  claim(canonical);
  for (const auto& a : aliases) {
    const std::string alias = text::to_lower(text::trim(a));
    if (!alias.empty()) claim(alias);
  }
}

std::string AliasMap::canonicalize(std::string_view name) const {
  std::string key = text::to_lower(text::trim(name));
  const auto it = alias_to_canonical_.find(key);
  return it == alias_to_canonical_.end() ? key : it->second;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& x : a) common += b.count(x);
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

double dice_tokens(std::string_view a, std::string_view b) {
  const auto wa = text::words(a);
  const auto wb = text::words(b);
  const std::set<std::string> x(wa.begin(), wa.end());
  const std::set<std::string> y(wb.begin(), wb.end());
  if (x.empty() && y.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& t : x) common += y.count(t);
  return 2.0 * static_cast<double>(common) / static_cast<double>(x.size() + y.size());
}

double location_score(std::string_view lg, std::string_view lh, double tau_loc, double coarse) {
  if (text::to_lower(text::trim(lg)) == text::to_lower(text::trim(lh))) return 1.0;
  if (dice_tokens(lg, lh) >= tau_loc) return coarse;
  return 0.0;
}

double clamped_cosine(const providers::EmbeddingVector& a, const providers::EmbeddingVector& b) {
  if (a.values == b.values) {
    // Same direction by construction; avoid rounding just below 1.
    for (double x : a.values) {
      if (x != 0.0) return 1.0;
    }
    return 0.0;
  }
  return std::clamp(providers::cosine(a, b), 0.0, 1.0);
}

double combine_event(double s_char, double s_loc, double s_sem, const EventWeights& w) {
  return w.characters * s_char + w.location * s_loc + w.semantic * s_sem;
}

EventScorer::EventScorer(const AliasMap& aliases, providers::Embedder& embedder, EventParams params)
    : aliases_(aliases), embedder_(embedder), params_(params) {
  const auto& w = params_.weights;
  if (w.characters < 0 || w.location < 0 || w.semantic < 0 ||
      std::abs(w.characters + w.location + w.semantic - 1.0) > 1e-9) {
    throw InvalidArgument("event weights must be non-negative and sum to 1");
  }
}

std::set<std::string> EventScorer::canonical_characters(const Event& e) const {
  std::set<std::string> out;
  for (const auto& c : e.characters) {
    std::string canon = aliases_.canonicalize(c);
    if (!canon.empty()) out.insert(std::move(canon));
  }
  return out;
}

providers::EmbeddingVector EventScorer::embedding(std::string_view s) {
  {
    std::lock_guard lock(mu_);
    if (const auto it = cache_.find(s); it != cache_.end()) return it->second;
  }
  providers::EmbeddingVector v = embedder_.embed(s);
  std::lock_guard lock(mu_);
  return cache_.emplace(std::string(s), std::move(v)).first->second;
}

double EventScorer::semantic_similarity(std::string_view dg, std::string_view dh) {
  return clamped_cosine(embedding(dg), embedding(dh));
}

EventComponents EventScorer::components(const Event& g, const Event& h) {
  EventComponents c;
  c.characters = jaccard(canonical_characters(g), canonical_characters(h));
  c.location = location_score(g.location, h.location, params_.tau_loc, params_.coarse);
  if (text::trim(g.location).empty() && text::trim(h.location).empty()) ++empty_location_matches_;
  c.semantic = semantic_similarity(g.description, h.description);
  c.total = std::clamp(combine_event(c.characters, c.location, c.semantic, params_.weights), 0.0, 1.0);
  return c;
}

std::vector<std::pair<std::size_t, std::size_t>> hungarian_max(const Matrix& s) {
  const std::size_t rows = s.size();
  if (rows == 0 || s[0].empty()) throw InvalidArgument("hungarian_max: empty matrix");
  const std::size_t cols = s[0].size();
  for (const auto& r : s) {
    if (r.size() != cols) throw InvalidArgument("hungarian_max: ragged matrix");
    for (double x : r) {
      if (!std::isfinite(x)) throw InvalidArgument("hungarian_max: non-finite entry");
    }
  }
  const std::size_t n = std::max(rows, cols);
  auto cost = [&](std::size_t i, std::size_t j) { return (i < rows && j < cols) ? -s[i][j] : 0.0; };

  // Shortest augmenting path with row/column potentials, 1-based; p[j] is the
  // row assigned to column j.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t i = p[j] - 1;
    if (i < rows && j - 1 < cols) out.emplace_back(i, j - 1);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Alignment threshold_align(const Matrix& s, double tau) {
  Alignment a;
  if (s.empty() || s[0].empty()) return a;
  double sum = 0.0;
  for (const auto& [i, j] : hungarian_max(s)) {
    if (s[i][j] >= tau) {
      a.pairs.emplace_back(i, j);
      a.similarities.push_back(s[i][j]);
      sum += s[i][j];
    }
  }
  a.avg_event_sim = a.pairs.empty() ? 0.0 : sum / static_cast<double>(a.pairs.size());
  return a;
}

namespace {

using Count = std::int64_t;

Count tie_pairs(const std::vector<double>& sorted) {
  Count total = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t k = i;
    while (k < sorted.size() && sorted[k] == sorted[i]) ++k;
    const Count t = static_cast<Count>(k - i);
    total += t * (t - 1) / 2;
    i = k;
  }
  return total;
}

// Sorts v[lo, hi) ascending and returns the number of strictly inverted pairs.
Count merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  Count swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<Count>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

double kendall_tau(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw InvalidArgument("kendall_tau: length mismatch");
  if (xs.size() < 2) throw InvalidArgument("kendall_tau: need at least 2 elements");
  const std::size_t n = xs.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return xs[a] != xs[b] ? xs[a] < xs[b] : ys[a] < ys[b];
  });
  std::vector<double> x(n), y(n);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = xs[idx[k]];
    y[k] = ys[idx[k]];
  }
  const Count n0 = static_cast<Count>(n) * static_cast<Count>(n - 1) / 2;
  const Count n1 = tie_pairs(x);
  Count n3 = 0;  // pairs tied in both
  for (std::size_t i = 0; i < n;) {
    std::size_t k = i;
    while (k < n && x[k] == x[i] && y[k] == y[i]) ++k;
    const Count t = static_cast<Count>(k - i);
    n3 += t * (t - 1) / 2;
    i = k;
  }
  std::vector<double> buf(n);
  const Count discordant = merge_count(y, buf, 0, n);
  const Count n2 = tie_pairs(y);
  if (n0 == n1 || n0 == n2) return std::numeric_limits<double>::quiet_NaN();
  const Count numerator = n0 - n1 - n2 + n3 - 2 * discordant;
  return static_cast<double>(numerator) / std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
}

std::size_t greedy_match_count(const Matrix& s, double threshold) {
  struct Cell {
    double sim;
    std::size_t i, j;
  };
  std::vector<Cell> cells;
  std::size_t cols = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    cols = std::max(cols, s[i].size());
    for (std::size_t j = 0; j < s[i].size(); ++j) {
      if (s[i][j] >= threshold) cells.push_back({s[i][j], i, j});
    }
  }
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  std::vector<char> row_used(s.size(), 0), col_used(cols, 0);
  std::size_t count = 0;
  for (const Cell& c : cells) {
    if (row_used[c.i] || col_used[c.j]) continue;
    row_used[c.i] = col_used[c.j] = 1;
    ++count;
  }
  return count;
}

void StructuralParams::validate() const {
  if (alpha < 0 || beta < 0 || gamma < 0 || std::abs(alpha + beta + gamma - 1.0) > 1e-9) {
    throw InvalidArgument("structural weights must be non-negative and sum to 1");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidArgument("alignment threshold must lie in [0, 1]");
}

double ordering_score(const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  if (pairs.size() < 2) return 0.0;
  auto sorted = pairs;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> xs, ys;
  for (const auto& [i, j] : sorted) {
    xs.push_back(static_cast<double>(i));
    ys.push_back(static_cast<double>(j));
  }
  double tk = kendall_tau(xs, ys);
  if (std::isnan(tk)) tk = 1.0;
  return (tk + 1.0) / 2.0;
}

double combine_structural(double avg, double coverage, double ordering, const StructuralParams& p) {
  return p.alpha * avg + p.beta * coverage + p.gamma * ordering;
}

StructuralScore structural_from_matrix(const Matrix& s, std::size_t n_g, std::size_t n_h,
                                       const StructuralParams& params) {
  params.validate();
  StructuralScore r;
  r.params = params;
  r.n_g = n_g;
  r.n_h = n_h;
  if (n_g == 0 && n_h == 0) {
    r.warning = "both event lists are empty";
    return r;
  }
  if (n_g > 0 && n_h > 0) r.alignment = threshold_align(s, params.tau);
  r.avg_event_sim = r.alignment.avg_event_sim;
  r.coverage = static_cast<double>(r.alignment.pairs.size()) / static_cast<double>(std::max(n_g, n_h));
  r.ordering = ordering_score(r.alignment.pairs);
  r.combined = combine_structural(r.avg_event_sim, r.coverage, r.ordering, params);
  return r;
}

StructuralScore structural_similarity(const std::vector<Event>& g, const std::vector<Event>& h, EventScorer& scorer,
                                      const StructuralParams& params) {
  Matrix s(g.size(), std::vector<double>(h.size(), 0.0));
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < h.size(); ++j) s[i][j] = scorer.similarity(g[i], h[j]);
  }
  StructuralScore r = structural_from_matrix(s, g.size(), h.size(), params);
  if (!r.warning.empty()) spdlog::warn("structural similarity: {}; score defined as 0", r.warning);
  return r;
}

std::string extraction_prompt(std::string_view passage) {
  return "Break the passage below into the narrative events it describes, in the order they happen.\n"
         "Return JSON only, shaped as {\"events\": [{\"characters\": [\"name\", ...], \"location\": \"place, or an "
         "empty string\", \"description\": \"what happens, at most 40 words\"}]}.\n"
         "Write character names as they appear in the passage.\n"
         "TEXT:\n" +
         std::string(passage);
}

ExtractionResult parse_events(std::string_view response) {
  nlohmann::json arr;
  if (auto obj = io::find_json_object(response); obj && obj->contains("events") && (*obj)["events"].is_array()) {
    arr = (*obj)["events"];
  } else {
    arr = nlohmann::json::parse(text::trim(response), nullptr, false);
    if (arr.is_discarded() || !arr.is_array()) throw InvalidArgument("extractor response holds no event list");
  }
  ExtractionResult r;
  for (const auto& item : arr) {
    if (!item.is_object()) throw InvalidArgument("extractor event is not an object");
    Event e = Event::from_json(item);
    if (e.description.empty()) {
      ++r.dropped;
      continue;
    }
    r.events.push_back(std::move(e));
  }
  return r;
}

ExtractionResult extract_events(std::string_view passage, providers::TextGenerator& extractor) {
  if (text::trim(passage).empty()) throw InvalidArgument("extract_events: empty text");
  providers::CompletionRequest req;
  req.prompt = extraction_prompt(passage);
  req.max_output_tokens = 2048;
  req.temperature = 0.0;
  req.seed = 0;
  std::string last_error;
  for (int attempt = 1; attempt <= 2; ++attempt) {
    try {
      ExtractionResult r = parse_events(extractor.complete(req));
      r.attempts = attempt;
      if (r.dropped > 0) spdlog::warn("event extraction: dropped {} event(s) without a description", r.dropped);
      return r;
    } catch (const InvalidArgument& e) {
      last_error = e.what();
    }
  }
  throw ProviderError(ProviderErrorKind::kBadResponse, "event extraction failed after retry: " + last_error);
}

nlohmann::json events_to_json(const std::vector<Event>& events) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& e : events) a.push_back(e.to_json());
  return a;
}

std::vector<Event> events_from_json(const nlohmann::json& j) {
  std::vector<Event> out;
  for (const auto& item : j) out.push_back(Event::from_json(item));
  return out;
}

}  // namespace icsim::structsim
