#include "icsim/config.hpp"

#include <cmath>
#include <set>

#include "icsim/error.hpp"
#include "icsim/io.hpp"
#include "icsim/text.hpp"

namespace icsim {
namespace {

using nlohmann::json;

// Reads keys from one JSON object and rejects the ones nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    seen_.insert(key);
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + "." + key + ": wrong type");
    }
  }

  const json* sub(const char* key) {
    const auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

bool unit(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

RunConfig RunConfig::from_json(const json& j, const fs::path& base_dir) {
  RunConfig c;
  c.base_dir = base_dir;
  ObjectReader r(j, "config");
  r.get("manifest", c.manifest);
  r.get("output_dir", c.output_dir);
  r.get("run_id", c.run_id);
  r.get("assets_dir", c.assets_dir);
  r.get("mappings_dir", c.mappings_dir);
  r.get("aliases_dir", c.aliases_dir);
  r.get("stopwords", c.stopwords);
  r.get("lexicon", c.lexicon);
  r.get("chapter_pattern", c.chapter_pattern);

  if (const json* ps = r.sub("providers")) {
    if (!ps->is_array()) throw ConfigError("config.providers: expected an array");
    for (const auto& p : *ps) {
      try {
        c.providers.push_back(providers::ProviderConfig::from_json(p));
      } catch (const json::exception& e) {
        throw ConfigError(std::string("config.providers: ") + e.what());
      }
    }
  }
  if (const json* ms = r.sub("models")) {
    if (!ms->is_array()) throw ConfigError("config.models: expected an array");
    for (const auto& m : *ms) {
      ObjectReader mr(m, "config.models[]");
      gen::ModelSpec spec;
      std::string release = "1970-01-01";
      mr.get("id", spec.id);
      mr.get("provider", spec.provider);
      mr.get("context_window", spec.context_window);
      mr.get("release_date", release);
      mr.finish();
      try {
        spec.release_date = corpus::Date::parse(release);
      } catch (const Error& e) {
        throw ConfigError("config.models[" + spec.id + "].release_date: " + e.what());
      }
      c.models.push_back(spec);
    }
  }
  r.get("judge", c.judge_provider);
  r.get("extractor", c.extractor_provider);
  r.get("embedder", c.embedder_provider);

  if (const json* cs = r.sub("conditions")) {
    if (!cs->is_array()) throw ConfigError("config.conditions: expected an array");
    c.conditions.clear();
    for (const auto& name : *cs) {
      if (!name.is_string()) throw ConfigError("config.conditions: expected strings");
      if (name.get<std::string>() == "all") {
        c.conditions.assign(features::kAllConditions.begin(), features::kAllConditions.end());
        continue;
      }
      try {
        c.conditions.push_back(features::parse_condition(name.get<std::string>()));
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("config.conditions: ") + e.what());
      }
    }
  }
  r.get("samples", c.samples);
  r.get("temperature", c.temperature);
  r.get("seed", c.seed);
  r.get("workers", c.workers);

  if (const json* t = r.sub("thresholds")) {
    ObjectReader tr(*t, "config.thresholds");
    tr.get("tau", c.thresholds.tau);
    tr.get("tau_loc", c.thresholds.tau_loc);
    tr.get("coarse_location", c.thresholds.coarse_location);
    tr.get("malformed_rate", c.thresholds.malformed_rate);
    tr.get("bleu_floor", c.thresholds.bleu_floor);
    tr.get("bleu_mean_floor", c.thresholds.bleu_mean_floor);
    tr.get("event_overlap", c.thresholds.event_overlap);
    tr.finish();
  }
  if (const json* w = r.sub("weights")) {
    ObjectReader wr(*w, "config.weights");
    if (const json* e = wr.sub("event")) {
      ObjectReader er(*e, "config.weights.event");
      er.get("characters", c.event_weights.characters);
      er.get("location", c.event_weights.location);
      er.get("semantic", c.event_weights.semantic);
      er.finish();
    }
    if (const json* s = wr.sub("structure")) {
      ObjectReader sr(*s, "config.weights.structure");
      sr.get("alpha", c.structure.alpha);
      sr.get("beta", c.structure.beta);
      sr.get("gamma", c.structure.gamma);
      sr.finish();
    }
    wr.finish();
  }
  c.structure.tau = c.thresholds.tau;
  if (const json* l = r.sub("linguistic")) {
    ObjectReader lr(*l, "config.linguistic");
    lr.get("top_words", c.linguistic.top_words);
    lr.get("top_bigrams", c.linguistic.top_bigrams);
    lr.get("topic_words", c.linguistic.topic_words);
    lr.get("punctuation_marks", c.linguistic.punctuation_marks);
    lr.finish();
  }
  r.get("concept_pairs", c.concept_pairs);
  if (const json* b = r.sub("bleu")) {
    ObjectReader br(*b, "config.bleu");
    br.get("smoothing", c.bleu.smoothing);
    br.get("epsilon", c.bleu.epsilon);
    br.get("max_order", c.bleu.max_order);
    br.finish();
  }
  if (const json* jd = r.sub("judging")) {
    ObjectReader jr(*jd, "config.judging");
    jr.get("retries", c.judge_retries);
    jr.get("temperature", c.judge_temperature);
    jr.finish();
  }
  if (const json* a = r.sub("analysis")) {
    ObjectReader ar(*a, "config.analysis");
    ar.get("ttr_window", c.ttr_window);
    ar.get("sentence_bin", c.sentence_bin);
    ar.finish();
  }
  if (const json* s = r.sub("study")) {
    ObjectReader sr(*s, "config.study");
    sr.get("attention_checks", c.human_study.options.attention_checks);
    sr.get("seed", c.human_study.options.seed);
    sr.get("exclusion_failures", c.human_study.options.exclusion_failures);
    sr.get("attention_pass_max", c.human_study.options.attention_pass_max);
    sr.get("port", c.human_study.port);
    sr.get("admin_token", c.human_study.admin_token);
    sr.get("static_dir", c.human_study.static_dir);
    sr.finish();
  }
  r.finish();
  c.validate();
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  const std::string content = io::read_file(path);
  const json j = json::parse(content, nullptr, false);
  if (j.is_discarded()) throw ConfigError(path.string() + ": not valid JSON");
  return from_json(j, path.parent_path());
}

json RunConfig::to_json() const {
  json ps = json::array();
  for (const auto& p : providers) ps.push_back(p.to_json());
  json ms = json::array();
  for (const auto& m : models) {
    ms.push_back({{"id", m.id},
                  {"provider", m.provider},
                  {"context_window", m.context_window},
                  {"release_date", m.release_date.iso()}});
  }
  json cs = json::array();
  for (auto c : conditions) cs.push_back(std::string(features::slug(c)));
  return {
      {"manifest", manifest},
      {"output_dir", output_dir},
      {"run_id", run_id},
      {"assets_dir", assets_dir},
      {"mappings_dir", mappings_dir},
      {"aliases_dir", aliases_dir},
      {"stopwords", stopwords},
      {"lexicon", lexicon},
      {"chapter_pattern", chapter_pattern},
      {"providers", ps},
      {"models", ms},
      {"judge", judge_provider},
      {"extractor", extractor_provider},
      {"embedder", embedder_provider},
      {"conditions", cs},
      {"samples", samples},
      {"temperature", temperature},
      {"seed", seed},
      {"workers", workers},
      {"thresholds",
       {{"tau", thresholds.tau},
        {"tau_loc", thresholds.tau_loc},
        {"coarse_location", thresholds.coarse_location},
        {"malformed_rate", thresholds.malformed_rate},
        {"bleu_floor", thresholds.bleu_floor},
        {"bleu_mean_floor", thresholds.bleu_mean_floor},
        {"event_overlap", thresholds.event_overlap}}},
      {"weights",
       {{"event",
         {{"characters", event_weights.characters},
          {"location", event_weights.location},
          {"semantic", event_weights.semantic}}},
        {"structure", {{"alpha", structure.alpha}, {"beta", structure.beta}, {"gamma", structure.gamma}}}}},
      {"linguistic",
       {{"top_words", linguistic.top_words},
        {"top_bigrams", linguistic.top_bigrams},
        {"topic_words", linguistic.topic_words},
        {"punctuation_marks", linguistic.punctuation_marks}}},
      {"concept_pairs", concept_pairs},
      {"bleu", {{"smoothing", bleu.smoothing}, {"epsilon", bleu.epsilon}, {"max_order", bleu.max_order}}},
      {"judging", {{"retries", judge_retries}, {"temperature", judge_temperature}}},
      {"analysis", {{"ttr_window", ttr_window}, {"sentence_bin", sentence_bin}}},
      {"study",
       {{"attention_checks", human_study.options.attention_checks},
        {"seed", human_study.options.seed},
        {"exclusion_failures", human_study.options.exclusion_failures},
        {"attention_pass_max", human_study.options.attention_pass_max},
        {"port", human_study.port},
        {"admin_token", human_study.admin_token},
        {"static_dir", human_study.static_dir}}},
  };
}

void RunConfig::validate() const {
  if (run_id.empty() || run_id.find_first_of("/\\") != std::string::npos || run_id == "." || run_id == "..") {
    throw ConfigError("run_id must be a plain directory name");
  }
  std::set<std::string> ids;
  for (const auto& p : providers) {
    p.validate();
    if (!ids.insert(p.id).second) throw ConfigError("duplicate provider id '" + p.id + "'");
  }
  std::set<std::string> model_ids;
  for (const auto& m : models) {
    try {
      m.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    if (!model_ids.insert(m.id).second) throw ConfigError("duplicate model id '" + m.id + "'");
    if (!ids.count(m.provider)) throw ConfigError("model '" + m.id + "': unknown provider '" + m.provider + "'");
  }
  if (models.empty()) throw ConfigError("no models configured");
  for (const auto* ref : {&judge_provider, &extractor_provider, &embedder_provider}) {
    if (ref->empty()) throw ConfigError("judge, extractor and embedder providers are required");
    if (!ids.count(*ref)) throw ConfigError("unknown provider '" + *ref + "'");
  }
  if (conditions.empty()) throw ConfigError("no conditions configured");
  if (samples < 1) throw ConfigError("samples must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (!(temperature >= 0.0) || !(judge_temperature >= 0.0)) throw ConfigError("temperatures must be >= 0");
  if (judge_retries < 0) throw ConfigError("judging.retries must be >= 0");
  for (double t : {thresholds.tau, thresholds.tau_loc, thresholds.coarse_location, thresholds.malformed_rate,
                   thresholds.bleu_floor, thresholds.bleu_mean_floor, thresholds.event_overlap}) {
    if (!unit(t)) throw ConfigError("thresholds must lie in [0, 1]");
  }
  const auto& w = event_weights;
  if (w.characters < 0 || w.location < 0 || w.semantic < 0 ||
      std::abs(w.characters + w.location + w.semantic - 1.0) > 1e-9) {
    throw ConfigError("event weights must be non-negative and sum to 1");
  }
  try {
    structure.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (bleu.max_order < 1 || (bleu.smoothing && !(bleu.epsilon > 0.0))) throw ConfigError("invalid BLEU settings");
  if (ttr_window < 1 || sentence_bin < 1) throw ConfigError("analysis windows must be positive");
  if (human_study.options.attention_checks < 0 || human_study.options.exclusion_failures < 1) {
    throw ConfigError("invalid study settings");
  }
  if (human_study.port < 0 || human_study.port > 65535) throw ConfigError("study.port out of range");
}

std::string RunConfig::hash() const {
  json j = to_json();
  j.erase("run_id");
  return text::hex64(text::fnv1a(j.dump()));
}

fs::path RunConfig::resolve(const std::string& p) const {
  const fs::path path(p);
  return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
}

const providers::ProviderConfig& RunConfig::provider(const std::string& id) const {
  for (const auto& p : providers) {
    if (p.id == id) return p;
  }
  throw ConfigError("unknown provider '" + id + "'");
}

}  // namespace icsim
