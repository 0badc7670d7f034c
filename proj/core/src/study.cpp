#include "icsim/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <numeric>
#include <random>

#include "icsim/text.hpp"

namespace icsim::study {

double llm_overall(double style, double structural) { return ((style - 1.0) / 4.0 + structural) / 2.0; }

nlohmann::json StudyItem::to_json() const {
  return {{"id", id},
          {"novel", novel_id},
          {"condition", std::string(features::slug(condition))},
          {"model", model_id},
          {"candidate_novel", candidate_novel_id},
          {"truth", truth},
          {"candidate", candidate},
          {"attention_check", attention_check}};
}

StudyItem StudyItem::from_json(const nlohmann::json& j) {
  StudyItem it;
  it.id = j.at("id");
  it.novel_id = j.at("novel");
  it.condition = features::parse_condition(j.at("condition").get<std::string>());
  it.model_id = j.at("model");
  it.candidate_novel_id = j.at("candidate_novel");
  it.truth = j.at("truth");
  it.candidate = j.at("candidate");
  it.attention_check = j.at("attention_check");
  return it;
}

nlohmann::json StudyDefinition::to_json() const {
  nlohmann::json items_j = nlohmann::json::array();
  for (const auto& it : items) items_j.push_back(it.to_json());
  return {{"options",
           {{"attention_checks", options.attention_checks},
            {"seed", options.seed},
            {"exclusion_failures", options.exclusion_failures},
            {"attention_pass_max", options.attention_pass_max}}},
          {"items", items_j}};
}

StudyDefinition StudyDefinition::from_json(const nlohmann::json& j) {
  StudyDefinition d;
  const auto& o = j.at("options");
  d.options.attention_checks = o.at("attention_checks");
  d.options.seed = o.at("seed");
  d.options.exclusion_failures = o.at("exclusion_failures");
  d.options.attention_pass_max = o.at("attention_pass_max");
  for (const auto& it : j.at("items")) d.items.push_back(StudyItem::from_json(it));
  return d;
}

const StudyItem* StudyDefinition::find(const std::string& item_id) const {
  for (const auto& it : items) {
    if (it.id == item_id) return &it;
  }
  return nullptr;
}

namespace {

std::string opaque_id(std::uint64_t seed, const std::string& key) {
  return "item-" + text::hex64(text::mix(seed, text::fnv1a(key))).substr(0, 12);
}

}  // namespace

StudyDefinition build_study(const std::vector<StudyCandidate>& candidates,
                            const std::map<std::string, std::string>& truths, const StudyOptions& options) {
  if (options.attention_checks < 0) throw InvalidArgument("study: attention_checks must be >= 0");
  if (options.exclusion_failures < 1) throw InvalidArgument("study: exclusion_failures must be >= 1");

  std::map<std::pair<std::string, ConditionId>, const StudyCandidate*> best;
  for (const auto& c : candidates) {
    if (!std::isfinite(c.style) || !std::isfinite(c.structural)) {
      throw InvalidArgument("study: missing scores for " + c.novel_id + "/" + c.model_id);
    }
    if (truths.find(c.novel_id) == truths.end()) throw InvalidArgument("study: no ground truth for " + c.novel_id);
    const auto key = std::make_pair(c.novel_id, c.condition);
    const StudyCandidate*& cur = best[key];
    if (cur == nullptr) {
      cur = &c;
      continue;
    }
    const double a = llm_overall(c.style, c.structural);
    const double b = llm_overall(cur->style, cur->structural);
    if (a > b || (a == b && c.model_id < cur->model_id)) cur = &c;
  }
  if (best.empty()) throw InvalidArgument("study: no candidates");

  StudyDefinition d;
  d.options = options;
  std::vector<std::string> novels;
  for (const auto& [key, c] : best) {
    if (novels.empty() || novels.back() != key.first) novels.push_back(key.first);
    StudyItem it;
    it.novel_id = c->novel_id;
    it.condition = c->condition;
    it.model_id = c->model_id;
    it.candidate_novel_id = c->novel_id;
    it.truth = truths.at(c->novel_id);
    it.candidate = c->text;
    it.id = opaque_id(options.seed, it.novel_id + "|" + std::string(features::slug(it.condition)));
    d.items.push_back(std::move(it));
  }
  const std::size_t regular = d.items.size();

  if (options.attention_checks > 0) {
    if (novels.size() < 2) throw InvalidArgument("study: attention checks need at least two novels");
    for (int k = 0; k < options.attention_checks; ++k) {
      const std::string& truth_novel = novels[static_cast<std::size_t>(k) % novels.size()];
      const std::string& other = novels[(static_cast<std::size_t>(k) + 1) % novels.size()];
      // Rotate through the other novel's regular items.
      std::vector<const StudyItem*> pool;
      for (std::size_t i = 0; i < regular; ++i) {
        if (d.items[i].novel_id == other) pool.push_back(&d.items[i]);
      }
      const StudyItem& src = *pool[static_cast<std::size_t>(k) % pool.size()];
      StudyItem it;
      it.novel_id = truth_novel;
      it.condition = src.condition;
      it.model_id = src.model_id;
      it.candidate_novel_id = other;
      it.truth = truths.at(truth_novel);
      it.candidate = src.candidate;
      it.attention_check = true;
      it.id = opaque_id(options.seed, "check|" + std::to_string(k));
      d.items.push_back(std::move(it));
    }
  }
  return d;
}

std::string_view to_string(Presentation p) {
  return p == Presentation::kTruthFirst ? "truth-first" : "candidate-first";
}

nlohmann::json RatingRecord::to_json() const {
  return {{"rater_id", rater_id},
          {"item_id", item_id},
          {"q_style", q_style},
          {"q_structure", q_structure},
          {"q_overall", q_overall},
          {"justification", justification},
          {"presentation", std::string(to_string(presentation))},
          {"timestamp", timestamp}};
}

RatingRecord RatingRecord::from_json(const nlohmann::json& j) {
  RatingRecord r;
  auto score = [&](const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer()) {
      throw InvalidArgument(std::string("rating: ") + key + " must be an integer 1-5");
    }
    return it->get<int>();
  };
  if (!j.is_object()) throw InvalidArgument("rating: expected an object");
  r.rater_id = j.value("rater_id", "");
  r.item_id = j.value("item_id", "");
  r.q_style = score("q_style");
  r.q_structure = score("q_structure");
  r.q_overall = score("q_overall");
  if (const auto it = j.find("justification"); it != j.end() && it->is_string()) r.justification = *it;
  r.presentation = j.value("presentation", "truth-first") == "candidate-first" ? Presentation::kCandidateFirst
                                                                                : Presentation::kTruthFirst;
  r.timestamp = j.value("timestamp", "");
  return r;
}

namespace {

void check_range(const RatingRecord& r) {
  for (const auto& [name, v] :
       {std::pair{"q_style", r.q_style}, std::pair{"q_structure", r.q_structure}, std::pair{"q_overall", r.q_overall}}) {
    if (v < 1 || v > 5) throw InvalidArgument(std::string("rating: ") + name + " must be in 1..5");
  }
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double sq = 0.0;
  for (double x : v) sq += (x - mean) * (x - mean);
  return {mean, std::sqrt(sq / static_cast<double>(v.size()))};
}

judge::ScoreSummary summary_of(const std::vector<double>& v) {
  const auto [m, s] = mean_std(v);
  return {v.size(), m, s};
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::map<std::string, std::vector<std::string>> score_attention_checks(const StudyDefinition& study,
                                                                       const std::vector<RatingRecord>& ratings) {
  std::map<std::string, std::vector<std::string>> failures;
  for (const auto& r : ratings) {
    const StudyItem* it = study.find(r.item_id);
    if (it == nullptr || !it->attention_check) continue;
    if (r.q_overall > study.options.attention_pass_max) {
      failures[r.rater_id].push_back("attention check " + r.item_id + " rated overall " +
                                     std::to_string(r.q_overall));
    }
  }
  std::map<std::string, std::vector<std::string>> excluded;
  for (auto& [rater, reasons] : failures) {
    if (static_cast<int>(reasons.size()) >= study.options.exclusion_failures) excluded[rater] = std::move(reasons);
  }
  return excluded;
}

StudyResult aggregate_study(const StudyDefinition& study, const std::vector<RatingRecord>& ratings) {
  StudyResult res;
  res.excluded = score_attention_checks(study, ratings);
  std::map<ConditionId, std::array<std::vector<double>, 3>> per_condition;
  for (const auto& item : study.items) {
    if (item.attention_check) continue;
    std::vector<double> s, st, o;
    for (const auto& r : ratings) {
      if (r.item_id != item.id || res.excluded.count(r.rater_id)) continue;
      s.push_back(r.q_style);
      st.push_back(r.q_structure);
      o.push_back(r.q_overall);
    }
    if (s.empty()) {
      res.gaps.push_back(item.id);
      continue;
    }
    ItemResult ir{item.id, item.novel_id, item.condition, s.size(),
                  mean_std(s).first, mean_std(st).first, mean_std(o).first};
    res.items.push_back(ir);
    auto& cols = per_condition[item.condition];
    cols[0].push_back(ir.style);
    cols[1].push_back(ir.structure);
    cols[2].push_back(ir.overall);
  }
  for (const auto& [c, cols] : per_condition) {
    res.conditions[c] = {summary_of(cols[0]), summary_of(cols[1]), summary_of(cols[2])};
  }
  return res;
}

nlohmann::json StudyResult::to_json() const {
  nlohmann::json items_j = nlohmann::json::array();
  for (const auto& it : items) {
    items_j.push_back({{"item_id", it.item_id},
                       {"novel", it.novel_id},
                       {"condition", std::string(features::display_name(it.condition))},
                       {"raters", it.raters},
                       {"style", it.style},
                       {"structure", it.structure},
                       {"overall", it.overall}});
  }
  nlohmann::json conds = nlohmann::json::array();
  for (ConditionId c : features::kAllConditions) {
    const auto it = conditions.find(c);
    if (it == conditions.end()) continue;
    auto cell = [](const judge::ScoreSummary& s) {
      return nlohmann::json{{"mean", s.mean}, {"std", s.stddev}, {"n", s.count}};
    };
    conds.push_back({{"condition", std::string(features::display_name(c))},
                     {"style", cell(it->second.linguistic)},
                     {"structure", cell(it->second.structure)},
                     {"overall", cell(it->second.overall)}});
  }
  nlohmann::json ex = nlohmann::json::object();
  for (const auto& [rater, reasons] : excluded) ex[rater] = reasons;
  return {{"items", items_j}, {"conditions", conds}, {"excluded_raters", ex}, {"gaps", gaps}};
}

nlohmann::json rubric() {
  const nlohmann::json scale = nlohmann::json::array({
      {{"value", 1}, {"label", "Very different"}},
      {{"value", 2}, {"label", "Different"}},
      {{"value", 3}, {"label", "Moderately similar"}},
      {{"value", 4}, {"label", "Similar"}},
      {{"value", 5}, {"label", "Very similar"}},
  });
  return {
      {"instructions",
       "One passage is the author's own continuation of a novel; the other was written to imitate that author. "
       "Read both and rate how alike they are."},
      {"questions",
       nlohmann::json::array({
           {{"key", "q_style"},
            {"title", "Linguistic Style Similarity"},
            {"prompt", "Do the passages share word choice, sentence rhythm, punctuation habits and tone?"},
            {"required", true}},
           {{"key", "q_structure"},
            {"title", "Narrative Structure Similarity"},
            {"prompt", "Do the passages move through events, scenes and characters in a comparable way?"},
            {"required", true}},
           {{"key", "q_overall"},
            {"title", "Overall Authorial Authenticity"},
            {"prompt", "Taken together, could both passages plausibly come from the same author?"},
            {"required", true}},
           {{"key", "justification"},
            {"title", "Brief Justification"},
            {"prompt", "Optional: a sentence or two on what drove your ratings."},
            {"required", false}},
       })},
      {"scale", scale}};
}

StudyService::StudyService(StudyDefinition study, fs::path dir) : study_(std::move(study)), dir_(std::move(dir)) {
  if (study_.items.empty()) throw InvalidArgument("study has no items");
  if (dir_.empty()) return;
  fs::create_directories(dir_);
  const fs::path raters = dir_ / "raters.jsonl";
  const fs::path ratings = dir_ / "ratings.jsonl";
  if (fs::exists(raters)) {
    for (const auto& row : io::read_jsonl(raters)) {
      auto& st = raters_[row.at("rater_id").get<std::string>()];
      if (row.contains("served")) st.served.insert(row.at("served").get<std::string>());
    }
  }
  if (fs::exists(ratings)) {
    for (const auto& row : io::read_jsonl(ratings)) {
      RatingRecord r = RatingRecord::from_json(row);
      auto& st = raters_[r.rater_id];
      st.served.insert(r.item_id);
      st.rated.insert(r.item_id);
      ratings_.push_back(std::move(r));
    }
  }
  rater_log_ = std::make_unique<io::JsonlAppender>(raters);
  rating_log_ = std::make_unique<io::JsonlAppender>(ratings);
}

std::string StudyService::register_rater(const std::optional<std::string>& requested) {
  std::string id;
  if (requested && !requested->empty()) {
    id = *requested;
    if (id.size() > 64 || id.find_first_of(" \t\r\n") != std::string::npos) {
      throw InvalidArgument("rater id must be at most 64 characters without whitespace");
    }
  } else {
    std::random_device rd;
    const std::uint64_t hi = (static_cast<std::uint64_t>(rd()) << 32) | rd();
    id = "r-" + text::hex64(hi);
  }
  std::lock_guard lock(mu_);
  if (raters_.emplace(id, RaterState{}).second && rater_log_) {
    rater_log_->append({{"rater_id", id}, {"registered", utc_now()}});
  }
  return id;
}

bool StudyService::has_rater(const std::string& rater) const {
  std::lock_guard lock(mu_);
  return raters_.count(rater) != 0;
}

std::vector<std::size_t> StudyService::item_order(const std::string& rater) const {
  std::vector<std::size_t> order(study_.items.size());
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t state = text::mix(study_.options.seed, text::fnv1a(rater));
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = text::splitmix64(state) % i;
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

Presentation StudyService::presentation(const std::string& rater, const std::string& item_id) const {
  std::uint64_t state = text::mix(study_.options.seed ^ 0x5bd1e995ULL, text::fnv1a(rater + "|" + item_id));
  return (text::splitmix64(state) & 1U) ? Presentation::kCandidateFirst : Presentation::kTruthFirst;
}

std::optional<nlohmann::json> StudyService::next_item(const std::string& rater) {
  std::lock_guard lock(mu_);
  const auto st = raters_.find(rater);
  if (st == raters_.end()) throw NotFound("unknown rater");
  for (std::size_t idx : item_order(rater)) {
    const StudyItem& item = study_.items[idx];
    if (st->second.rated.count(item.id)) continue;
    if (st->second.served.insert(item.id).second && rater_log_) {
      rater_log_->append({{"rater_id", rater}, {"served", item.id}});
    }
    const bool truth_first = presentation(rater, item.id) == Presentation::kTruthFirst;
    return nlohmann::json{{"item_id", item.id},
                          {"passage_a", truth_first ? item.truth : item.candidate},
                          {"passage_b", truth_first ? item.candidate : item.truth},
                          {"progress", {{"completed", st->second.rated.size()}, {"total", study_.items.size()}}}};
  }
  return std::nullopt;
}

RatingRecord StudyService::submit(RatingRecord record) {
  check_range(record);
  std::lock_guard lock(mu_);
  const auto st = raters_.find(record.rater_id);
  if (st == raters_.end()) throw NotFound("unknown rater");
  if (study_.find(record.item_id) == nullptr) throw NotFound("unknown item");
  if (st->second.rated.count(record.item_id)) throw Conflict("item already rated by this rater");
  if (!st->second.served.count(record.item_id)) throw Conflict("item was not served to this rater");
  record.presentation = presentation(record.rater_id, record.item_id);
  record.timestamp = utc_now();
  st->second.rated.insert(record.item_id);
  if (rating_log_) rating_log_->append(record.to_json());
  ratings_.push_back(record);
  return record;
}

std::vector<RatingRecord> StudyService::ratings() const {
  std::lock_guard lock(mu_);
  return ratings_;
}

StudyResult StudyService::results() const { return aggregate_study(study_, ratings()); }

nlohmann::json StudyService::metadata() const {
  return {{"items", study_.items.size()}, {"rubric", rubric()}};
}

}  // namespace icsim::study
