#include "icsim/genrunner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "icsim/error.hpp"
#include "icsim/io.hpp"

namespace icsim::gen {

void ModelSpec::validate() const {
  if (id.empty()) throw InvalidArgument("model: empty id");
  if (provider.empty()) throw InvalidArgument("model '" + id + "': no provider");
  if (context_window < 1) throw InvalidArgument("model '" + id + "': context window must be >= 1");
}

nlohmann::json Continuation::to_json() const {
  return {{"novel", novel_id},
          {"model", model_id},
          {"condition", std::string(features::slug(condition))},
          {"index", sample},
          {"bleu", bleu},
          {"wellformed", wellformed},
          {"reason", reason},
          {"max_output_tokens", max_output_tokens},
          {"budget_floored", budget_floored}};
}

Continuation Continuation::from_json(const nlohmann::json& j) {
  Continuation c;
  c.novel_id = j.at("novel");
  c.model_id = j.at("model");
  c.condition = features::parse_condition(j.at("condition").get<std::string>());
  c.sample = j.at("index");
  c.bleu = j.at("bleu");
  c.wellformed = j.at("wellformed");
  c.reason = j.value("reason", "");
  c.max_output_tokens = j.value("max_output_tokens", std::size_t{1});
  c.budget_floored = j.value("budget_floored", false);
  return c;
}

std::size_t output_budget(std::size_t context_window, std::size_t prompt_tokens) {
  return prompt_tokens >= context_window ? 1 : context_window - prompt_tokens;
}

std::uint64_t sample_seed(std::uint64_t base, const std::string& model, const std::string& novel,
                          ConditionId condition, int sample) {
  std::uint64_t h = text::fnv1a(model);
  h = text::fnv1a(novel, h);
  h = text::fnv1a(features::slug(condition), h);
  return text::mix(text::mix(base, h), static_cast<std::uint64_t>(sample));
}

std::vector<Continuation> run_generation(const std::vector<GenerationTask>& tasks,
                                         const std::map<std::string, providers::TextGenerator*>& generators,
                                         const GenerationOptions& options, const text::Tokenizer& tokenizer) {
  if (options.samples < 1) throw InvalidArgument("run_generation: samples must be >= 1");
  for (const auto& t : tasks) {
    if (t.model == nullptr) throw InvalidArgument("run_generation: task without model");
    if (generators.find(t.model->id) == generators.end()) {
      throw InvalidArgument("run_generation: no generator for model '" + t.model->id + "'");
    }
  }

  std::vector<std::size_t> budgets(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    budgets[i] = output_budget(tasks[i].model->context_window, tokenizer.count(tasks[i].prompt));
  }

  const std::size_t n = tasks.size() * static_cast<std::size_t>(options.samples);
  std::vector<Continuation> out(n);
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t k = next.fetch_add(1); k < n; k = next.fetch_add(1)) {
      const std::size_t ti = k / static_cast<std::size_t>(options.samples);
      const int s = static_cast<int>(k % static_cast<std::size_t>(options.samples));
      const GenerationTask& task = tasks[ti];
      Continuation& c = out[k];
      c.novel_id = task.novel_id;
      c.model_id = task.model->id;
      c.condition = task.condition;
      c.sample = s;
      c.max_output_tokens = budgets[ti];
      c.budget_floored = task.model->context_window <= tokenizer.count(task.prompt);

      providers::CompletionRequest req;
      req.prompt = task.prompt;
      req.max_output_tokens = budgets[ti];
      req.temperature = options.temperature;
      req.seed = sample_seed(options.seed, c.model_id, c.novel_id, c.condition, s);
      try {
        c.text = generators.at(c.model_id)->complete(req);
      } catch (const std::exception& e) {
        c.text.clear();
        c.reason = std::string("provider: ") + e.what();
      }
      const OutputCheck check = validate_output(c.text, options.output_check);
      c.wellformed = check.wellformed;
      if (c.reason.empty()) c.reason = check.reason;
      c.bleu = c.text.empty() ? 0.0 : bleu(c.text, task.reference, options.bleu, tokenizer);
      if (options.on_sample) options.on_sample(c);
    }
  };

  const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

std::vector<BleuStats> compute_bleu_stats(const std::vector<Continuation>& continuations) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const Continuation*>> by_model;
  for (const auto& c : continuations) {
    auto [it, inserted] = by_model.try_emplace(c.model_id);
    if (inserted) order.push_back(c.model_id);
    it->second.push_back(&c);
  }
  std::vector<BleuStats> out;
  for (const auto& id : order) {
    const auto& rows = by_model[id];
    BleuStats s;
    s.model_id = id;
    s.count = rows.size();
    s.min = 1.0;
    s.max = 0.0;
    double sum = 0.0;
    std::size_t bad = 0;
    for (const auto* c : rows) {
      const double b = c->wellformed ? c->bleu : 0.0;
      sum += b;
      s.min = std::min(s.min, b);
      s.max = std::max(s.max, b);
      if (!c->wellformed) ++bad;
    }
    s.mean = sum / static_cast<double>(rows.size());
    double sq = 0.0;
    for (const auto* c : rows) {
      const double d = (c->wellformed ? c->bleu : 0.0) - s.mean;
      sq += d * d;
    }
    s.stddev = std::sqrt(sq / static_cast<double>(rows.size()));
    s.malformed_rate = static_cast<double>(bad) / static_cast<double>(rows.size());
    out.push_back(s);
  }
  return out;
}

PretestReport pretest_filter(const std::vector<BleuStats>& stats, const PretestThresholds& th) {
  if (stats.empty()) throw ConfigError("pretest: no models to filter");
  PretestReport r;
  r.stats = stats;
  for (const auto& s : stats) {
    Exclusion ex{s.model_id, {}};
    if (s.malformed_rate > th.malformed_rate) ex.reasons.push_back("malformed rate " + io::fixed(s.malformed_rate, 3));
    if (s.max < th.bleu_floor) ex.reasons.push_back("max BLEU below floor");
    if (s.mean < th.bleu_mean_floor) ex.reasons.push_back("mean BLEU below floor");
    if (ex.reasons.empty()) {
      r.retained.push_back(s.model_id);
    } else {
      r.excluded.push_back(std::move(ex));
    }
  }
  if (r.retained.empty()) throw ConfigError("pretest: every model was excluded");
  return r;
}

std::string PretestReport::to_csv() const {
  std::string out = "# malformed or empty samples count as BLEU 0\n";
  out += io::csv_row({"Model", "Mean", "Std", "Max", "Min", "Samples", "MalformedRate", "Verdict", "Reasons"});
  for (const auto& s : stats) {
    std::string verdict = "retained";
    std::string reasons;
    for (const auto& e : excluded) {
      if (e.model_id == s.model_id) {
        verdict = "excluded";
        reasons = text::join(e.reasons, "; ");
      }
    }
    out += io::csv_row({s.model_id, io::fixed(s.mean, 4), io::fixed(s.stddev, 4), io::fixed(s.max, 4),
                        io::fixed(s.min, 4), std::to_string(s.count), io::fixed(s.malformed_rate, 4), verdict,
                        reasons});
  }
  return out;
}

const Continuation* CandidateSet::find(const CandidateKey& key) const {
  for (const auto& c : chosen) {
    if (c.novel_id == key.novel_id && c.model_id == key.model_id && c.condition == key.condition) return &c;
  }
  return nullptr;
}

CandidateSet select_candidates(const std::vector<Continuation>& continuations,
                               const std::vector<std::string>& retained) {
  std::vector<CandidateKey> order;
  std::map<CandidateKey, const Continuation*> best;
  for (const auto& c : continuations) {
    if (std::find(retained.begin(), retained.end(), c.model_id) == retained.end()) continue;
    const CandidateKey key{c.novel_id, c.model_id, c.condition};
    auto [it, inserted] = best.try_emplace(key, nullptr);
    if (inserted) order.push_back(key);
    if (!c.wellformed) continue;
    const Continuation* cur = it->second;
    if (cur == nullptr || c.bleu > cur->bleu || (c.bleu == cur->bleu && c.sample < cur->sample)) it->second = &c;
  }
  CandidateSet set;
  for (const auto& key : order) {
    if (const Continuation* c = best[key]) {
      set.chosen.push_back(*c);
    } else {
      set.gaps.push_back(key);
    }
  }
  return set;
}

}  // namespace icsim::gen
