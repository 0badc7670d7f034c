#include "icsim/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "icsim/analysis.hpp"
#include "icsim/corpus.hpp"
#include "icsim/error.hpp"
#include "icsim/features.hpp"
#include "icsim/genrunner.hpp"
#include "icsim/io.hpp"
#include "icsim/providers.hpp"
#include "icsim/resources.hpp"
#include "icsim/structsim.hpp"
#include "icsim/study.hpp"
#include "icsim/study_server.hpp"
#include "icsim/stylejudge.hpp"
#include "icsim/text.hpp"

namespace icsim::pipeline {
namespace {

using nlohmann::json;
using features::ConditionId;

constexpr const char* kStageVersion = "1";

struct NovelInfo {
  std::string id;
  std::string title;
  std::string author;
  corpus::Segment context;
  corpus::Segment truth;
};

// Model ids may carry characters that are awkward in paths ("org/model:tag").
std::string path_safe(std::string_view s) {
  std::string out;
  for (char ch : s) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '.' ||
                    ch == '-' || ch == '_' || ch == '+';
    out.push_back(ok ? ch : '_');
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

std::string key_string(const gen::CandidateKey& k) {
  return k.novel_id + "|" + k.model_id + "|" + std::string(features::slug(k.condition));
}

gen::CandidateKey key_from_json(const json& j) {
  return {j.at("novel").get<std::string>(), j.at("model").get<std::string>(),
          features::parse_condition(j.at("condition").get<std::string>())};
}

json key_json(const gen::CandidateKey& k) {
  return {{"novel", k.novel_id}, {"model", k.model_id}, {"condition", std::string(features::slug(k.condition))}};
}

json segment_json(const corpus::Segment& s, const std::string& file) {
  const auto stats = corpus::text_stats(s.text);
  return {{"file", file},
          {"chapters", s.chapter_range.str()},
          {"chapter_offsets", s.chapter_offsets},
          {"words", s.word_count},
          {"tokens", s.token_count},
          {"sentences", stats.sentence_count},
          {"truncated", s.truncated}};
}

corpus::Segment load_segment(const fs::path& dir, const std::string& novel, corpus::SegmentKind kind, const json& j) {
  corpus::Segment s;
  s.novel_id = novel;
  s.kind = kind;
  const fs::path file = dir / j.at("file").get<std::string>();
  io::require_file(file, "segment text from `icsim ingest`");
  s.text = io::read_file(file);
  s.chapter_range = corpus::ChapterRange::parse(j.at("chapters").get<std::string>());
  s.chapter_offsets = j.at("chapter_offsets").get<std::vector<std::size_t>>();
  s.word_count = j.at("words");
  s.token_count = j.at("tokens");
  s.truncated = j.at("truncated");
  return s;
}

json read_json_file(const fs::path& path, std::string_view what) {
  io::require_file(path, what);
  json j = json::parse(io::read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(path.string() + ": not valid JSON");
  return j;
}

void write_json_file(const fs::path& path, json j, const io::Provenance& prov) {
  j["_provenance"] = prov.record().at("_provenance");
  io::write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kIngest: return "ingest";
    case Stage::kProfile: return "profile";
    case Stage::kPrompts: return "prompts";
    case Stage::kGenerate: return "generate";
    case Stage::kPretest: return "pretest";
    case Stage::kStructsim: return "structsim";
    case Stage::kJudge: return "judge";
    case Stage::kStudy: return "study";
    case Stage::kReport: return "report";
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (Stage s : kAllStages) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first;
  std::mutex mu;
  auto work = [&] {
    for (std::size_t i = next++; i < n && !failed.load(); i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
        failed = true;
      }
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first) std::rethrow_exception(first);
}

// Shared helpers bound to one run.
namespace {

class Run {
 public:
  explicit Run(const RunConfig& c) : c_(c), dir_(c.run_dir()) {}

  const fs::path& dir() const { return dir_; }
  io::Provenance prov(Stage s) const { return {std::string(to_string(s)), kStageVersion, c_.hash()}; }

  const resources::WordSet& stopwords() {
    if (c_.stopwords.empty()) return resources::stopwords();
    if (!stopwords_) stopwords_ = resources::load_wordlist(c_.resolve(c_.stopwords));
    return *stopwords_;
  }

  const features::SentimentLexicon& lexicon() {
    if (c_.lexicon.empty()) return features::SentimentLexicon::bundled();
    if (!lexicon_) lexicon_ = features::SentimentLexicon::load(c_.resolve(c_.lexicon));
    return *lexicon_;
  }

  std::vector<NovelInfo> novels() const {
    const fs::path stats = dir_ / "segments" / "stats.jsonl";
    io::require_file(stats, "segment stats from `icsim ingest`");
    std::vector<NovelInfo> out;
    for (const auto& row : io::read_jsonl(stats)) {
      NovelInfo n;
      n.id = row.at("novel");
      n.title = row.at("title");
      n.author = row.at("author");
      n.context = load_segment(dir_ / "segments", n.id, corpus::SegmentKind::kContext, row.at("context"));
      n.truth = load_segment(dir_ / "segments", n.id, corpus::SegmentKind::kGroundTruth, row.at("truth"));
      out.push_back(std::move(n));
    }
    return out;
  }

  std::map<std::string, std::string> truths() const {
    std::map<std::string, std::string> out;
    for (auto& n : novels()) out[n.id] = std::move(n.truth.text);
    return out;
  }

  void require_continuations() const {
    io::require_file(dir_ / "continuations.jsonl", "continuations from `icsim generate`");
  }

  std::vector<gen::Continuation> candidates() const {
    require_continuations();
    const fs::path path = dir_ / "candidates.jsonl";
    io::require_file(path, "candidates from `icsim pretest`");
    std::vector<gen::Continuation> out;
    for (const auto& row : io::read_jsonl(path)) {
      auto c = gen::Continuation::from_json(row);
      const fs::path file = dir_ / row.at("path").get<std::string>();
      io::require_file(file, "continuation text");
      c.text = io::read_file(file);
      out.push_back(std::move(c));
    }
    return out;
  }

  std::vector<gen::CandidateKey> pretest_gaps() const {
    std::vector<gen::CandidateKey> out;
    const fs::path path = dir_ / "gaps.jsonl";
    if (!fs::exists(path)) return out;
    for (const auto& row : io::read_jsonl(path)) out.push_back(key_from_json(row));
    return out;
  }

  structsim::AliasMap aliases(const std::string& novel) const {
    const fs::path path = c_.resolve(c_.aliases_dir) / (novel + ".json");
    io::require_file(path, "character alias file for " + novel);
    return structsim::AliasMap::load(path);
  }

  std::unique_ptr<providers::TextGenerator> generator(const std::string& provider_id) const {
    return providers::make_generator(c_.provider(provider_id));
  }

  structsim::StructuralParams structural_params() const {
    auto p = c_.structure;
    p.tau = c_.thresholds.tau;
    return p;
  }

  structsim::EventParams event_params() const {
    return {c_.event_weights, c_.thresholds.tau_loc, c_.thresholds.coarse_location};
  }

 private:
  const RunConfig& c_;
  fs::path dir_;
  std::optional<resources::WordSet> stopwords_;
  std::optional<features::SentimentLexicon> lexicon_;
};

}  // namespace

Pipeline::Pipeline(RunConfig config) : config_(std::move(config)) { config_.validate(); }

void Pipeline::run(Stage stage) {
  fs::create_directories(run_dir());
  write_json_file(run_dir() / "config.json", config_.to_json(), {"config", kStageVersion, config_.hash()});
  spdlog::info("stage {} ({})", to_string(stage), run_dir().string());
  switch (stage) {
    case Stage::kIngest: return ingest();
    case Stage::kProfile: return profile();
    case Stage::kPrompts: return prompts();
    case Stage::kGenerate: return generate();
    case Stage::kPretest: return pretest();
    case Stage::kStructsim: return structsim();
    case Stage::kJudge: return judge();
    case Stage::kStudy: return study();
    case Stage::kReport: return report();
  }
}

void Pipeline::run_all() {
  for (Stage s : kAllStages) run(s);
}

void Pipeline::ingest() {
  Run run(config_);
  const auto manifest = corpus::CorpusManifest::load(config_.resolve(config_.manifest));
  if (manifest.novels.empty()) throw ConfigError("manifest lists no novels");
  const fs::path dir = run.dir() / "segments";
  fs::create_directories(dir);
  corpus::IngestOptions opts;
  opts.chapter_pattern = config_.chapter_pattern;

  std::vector<json> rows(manifest.novels.size());
  parallel_for(manifest.novels.size(), config_.workers, [&](std::size_t i) {
    const auto& entry = manifest.novels[i];
    const auto novel = corpus::ingest_novel(entry.path, entry, opts);
    const auto [context, truth] = corpus::split_segments(novel, entry);
    io::write_file_atomic(dir / (entry.id + ".context.txt"), context.text);
    io::write_file_atomic(dir / (entry.id + ".truth.txt"), truth.text);
    rows[i] = {{"novel", entry.id},
               {"title", entry.title},
               {"author", entry.author_ref},
               {"category", entry.category},
               {"release_date", entry.release_date.iso()},
               {"chapters", novel.chapter_count()},
               {"truncation_tokens", entry.truncation_tokens},
               {"context", segment_json(context, entry.id + ".context.txt")},
               {"truth", segment_json(truth, entry.id + ".truth.txt")}};
    spdlog::info("ingest {}: {} chapters, context {} tokens{}", entry.id, novel.chapter_count(),
                 context.token_count, context.truncated ? " (truncated)" : "");
  });
  io::write_jsonl(dir / "stats.jsonl", rows, run.prov(Stage::kIngest));
}

void Pipeline::profile() {
  Run run(config_);
  const auto novels = run.novels();
  const fs::path dir = run.dir() / "profiles";
  fs::create_directories(dir);
  features::FeatureResources res;
  res.stopwords = &run.stopwords();
  res.lexicon = &run.lexicon();
  parallel_for(novels.size(), config_.workers, [&](std::size_t i) {
    const auto p = features::extract_linguistic_profile(novels[i].context, config_.linguistic, res);
    write_json_file(dir / (novels[i].id + ".json"), {{"novel", novels[i].id}, {"profile", p.to_json()}},
                    run.prov(Stage::kProfile));
  });
}

void Pipeline::prompts() {
  Run run(config_);
  const auto novels = run.novels();
  const fs::path dir = run.dir() / "prompts";
  std::vector<json> index;
  features::PromptOptions opts;
  opts.max_concept_pairs = config_.concept_pairs;

  for (const auto& n : novels) {
    const auto profile = features::LinguisticProfile::from_json(
        read_json_file(run.dir() / "profiles" / (n.id + ".json"), "linguistic profile from `icsim profile`")
            .at("profile"));
    const auto assets = features::AuthorAssets::load(config_.resolve(config_.assets_dir) / n.author);
    std::optional<features::ConceptMappingSet> mappings;
    const fs::path pairs = config_.resolve(config_.mappings_dir) / (n.id + ".pairs");
    if (fs::exists(pairs)) mappings = features::ConceptMappingSet::load(pairs);

    fs::create_directories(dir / n.id);
    for (ConditionId c : config_.conditions) {
      features::PromptBundle bundle;
      try {
        bundle = features::assemble_prompt(c, n.context, n.title, assets, &profile,
                                           mappings ? &*mappings : nullptr, opts);
      } catch (const InvalidArgument& e) {
        throw ConfigError(n.id + " / " + std::string(features::slug(c)) + ": " + e.what());
      }
      const auto audit = features::audit_prompt(bundle, n.context, n.truth);
      if (!audit.ok) {
        std::string why;
        for (const auto& p : audit.problems) why += (why.empty() ? "" : "; ") + p;
        throw Error("prompt audit failed for " + n.id + " / " + std::string(features::slug(c)) + ": " + why);
      }
      const std::string rel = "prompts/" + n.id + "/" + std::string(features::slug(c)) + ".txt";
      io::write_file_atomic(run.dir() / rel, bundle.text);
      index.push_back({{"novel", n.id},
                       {"condition", std::string(features::slug(c))},
                       {"path", rel},
                       {"ingredients", bundle.ingredients},
                       {"tokens", text::default_tokenizer().count(bundle.text)}});
    }
  }
  io::write_jsonl(dir / "index.jsonl", index, run.prov(Stage::kPrompts));
}

void Pipeline::generate() {
  Run run(config_);
  const fs::path index_path = run.dir() / "prompts" / "index.jsonl";
  io::require_file(index_path, "prompt index from `icsim prompts`");
  const auto index = io::read_jsonl(index_path);
  const auto truths = run.truths();

  std::map<std::string, std::unique_ptr<providers::TextGenerator>> owned;
  std::map<std::string, providers::TextGenerator*> generators;
  for (const auto& m : config_.models) {
    owned[m.id] = run.generator(m.provider);
    generators[m.id] = owned[m.id].get();
  }

  std::vector<gen::GenerationTask> tasks;
  for (const auto& m : config_.models) {
    for (const auto& row : index) {
      gen::GenerationTask t;
      t.novel_id = row.at("novel");
      t.model = &m;
      t.condition = features::parse_condition(row.at("condition").get<std::string>());
      t.prompt = io::read_file(run.dir() / row.at("path").get<std::string>());
      const auto it = truths.find(t.novel_id);
      if (it == truths.end()) throw MissingArtifact("no ground truth for " + t.novel_id);
      t.reference = it->second;
      tasks.push_back(std::move(t));
    }
  }

  gen::GenerationOptions opts;
  opts.samples = config_.samples;
  opts.temperature = config_.temperature;
  opts.seed = config_.seed;
  opts.workers = config_.workers;
  opts.bleu = config_.bleu;
  const auto results = gen::run_generation(tasks, generators, opts);

  std::vector<json> rows;
  rows.reserve(results.size());
  for (const auto& c : results) {
    const std::string rel = "continuations/" + path_safe(c.model_id) + "/" + c.novel_id + "/" +
                            std::string(features::slug(c.condition)) + "/" + std::to_string(c.sample) + ".txt";
    fs::create_directories((run.dir() / rel).parent_path());
    io::write_file_atomic(run.dir() / rel, c.text);
    json row = c.to_json();
    row["path"] = rel;
    rows.push_back(std::move(row));
  }
  io::write_jsonl(run.dir() / "continuations.jsonl", rows, run.prov(Stage::kGenerate));
  spdlog::info("generate: {} samples", rows.size());
}

void Pipeline::pretest() {
  Run run(config_);
  run.require_continuations();
  std::vector<gen::Continuation> all;
  std::map<std::string, std::string> paths;
  for (const auto& row : io::read_jsonl(run.dir() / "continuations.jsonl")) {
    auto c = gen::Continuation::from_json(row);
    paths[key_string({c.novel_id, c.model_id, c.condition}) + "|" + std::to_string(c.sample)] = row.at("path");
    all.push_back(std::move(c));
  }
  const auto stats = gen::compute_bleu_stats(all);
  const auto report = gen::pretest_filter(
      stats, {config_.thresholds.malformed_rate, config_.thresholds.bleu_floor, config_.thresholds.bleu_mean_floor});
  io::write_file_atomic(run.dir() / "pretest.csv", run.prov(Stage::kPretest).csv_header() + report.to_csv());

  json excluded = json::array();
  for (const auto& e : report.excluded) excluded.push_back({{"model", e.model_id}, {"reasons", e.reasons}});
  write_json_file(run.dir() / "pretest.json", {{"retained", report.retained}, {"excluded", excluded}},
                  run.prov(Stage::kPretest));
  for (const auto& e : report.excluded) spdlog::warn("pretest excluded {}", e.model_id);

  const auto set = gen::select_candidates(all, report.retained);
  std::vector<json> rows;
  for (const auto& c : set.chosen) {
    json row = c.to_json();
    row["path"] = paths.at(key_string({c.novel_id, c.model_id, c.condition}) + "|" + std::to_string(c.sample));
    rows.push_back(std::move(row));
  }
  io::write_jsonl(run.dir() / "candidates.jsonl", rows, run.prov(Stage::kPretest));
  std::vector<json> gaps;
  for (const auto& g : set.gaps) gaps.push_back(key_json(g));
  io::write_jsonl(run.dir() / "gaps.jsonl", gaps, run.prov(Stage::kPretest));
}

void Pipeline::structsim() {
  Run run(config_);
  const auto candidates = run.candidates();
  const auto novels = run.novels();
  auto extractor = run.generator(config_.extractor_provider);
  auto embedder = providers::make_embedder(config_.provider(config_.embedder_provider));

  std::map<std::string, structsim::AliasMap> aliases;
  for (const auto& n : novels) aliases.emplace(n.id, run.aliases(n.id));

  // Extraction jobs: every truth passage, then every candidate.
  struct Extraction {
    std::optional<structsim::ExtractionResult> result;
    std::string error;
  };
  std::vector<Extraction> truth_ev(novels.size());
  std::vector<Extraction> cand_ev(candidates.size());
  parallel_for(novels.size() + candidates.size(), config_.workers, [&](std::size_t i) {
    const bool is_truth = i < novels.size();
    auto& slot = is_truth ? truth_ev[i] : cand_ev[i - novels.size()];
    const std::string& passage = is_truth ? novels[i].truth.text : candidates[i - novels.size()].text;
    try {
      slot.result = structsim::extract_events(passage, *extractor);
    } catch (const ProviderError& e) {
      slot.error = std::string("extraction: ") + e.what();
    }
  });

  const fs::path events_dir = run.dir() / "events";
  fs::create_directories(events_dir);
  const auto prov = run.prov(Stage::kStructsim);
  std::map<std::string, std::size_t> truth_index;
  for (std::size_t i = 0; i < novels.size(); ++i) {
    truth_index[novels[i].id] = i;
    if (truth_ev[i].result) {
      write_json_file(events_dir / (novels[i].id + ".truth.json"),
                      {{"novel", novels[i].id}, {"events", structsim::events_to_json(truth_ev[i].result->events)}},
                      prov);
    }
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!cand_ev[i].result) continue;
    const auto& c = candidates[i];
    const fs::path p = events_dir / c.novel_id / path_safe(c.model_id) / (std::string(features::slug(c.condition)) + ".json");
    fs::create_directories(p.parent_path());
    write_json_file(p, {{"events", structsim::events_to_json(cand_ev[i].result->events)}}, prov);
  }

  std::map<std::string, std::unique_ptr<structsim::EventScorer>> scorers;
  for (const auto& n : novels) {
    scorers[n.id] = std::make_unique<structsim::EventScorer>(aliases.at(n.id), *embedder, run.event_params());
  }

  const auto params = run.structural_params();
  std::vector<json> rows(candidates.size());
  parallel_for(candidates.size(), config_.workers, [&](std::size_t i) {
    const auto& c = candidates[i];
    json row = key_json({c.novel_id, c.model_id, c.condition});
    const auto ti = truth_index.find(c.novel_id);
    if (ti == truth_index.end()) throw MissingArtifact("no ground truth for " + c.novel_id);
    const auto& truth = truth_ev[ti->second];
    if (!truth.result || !cand_ev[i].result) {
      row["error"] = truth.result ? cand_ev[i].error : "ground truth " + truth.error;
      rows[i] = std::move(row);
      return;
    }
    auto& scorer = *scorers.at(c.novel_id);
    const auto& g = truth.result->events;
    const auto& h = cand_ev[i].result->events;
    const auto s = structsim::structural_similarity(g, h, scorer, params);
    row["avg_event_sim"] = s.avg_event_sim;
    row["coverage"] = s.coverage;
    row["ordering"] = s.ordering;
    row["structural"] = s.combined;
    row["events_truth"] = s.n_g;
    row["events_generated"] = s.n_h;
    row["aligned"] = s.alignment.pairs.size();
    row["event_overlap"] = analysis::event_overlap(h, g, scorer, config_.thresholds.event_overlap);
    row["warning"] = s.warning;
    rows[i] = std::move(row);
  });
  io::write_jsonl(run.dir() / "structural.jsonl", rows, prov);

  std::string csv = prov.csv_header();
  csv += io::csv_row({"Novel", "Model", "Condition", "AvgEventSim", "Coverage", "Ordering", "Structural",
                      "EventsTruth", "EventsGenerated", "Aligned", "EventOverlap", "Note"});
  for (const auto& r : rows) {
    if (r.contains("error")) {
      csv += io::csv_row({r["novel"], r["model"], r["condition"], "", "", "", "", "", "", "", "", r["error"]});
      continue;
    }
    csv += io::csv_row({r["novel"], r["model"], r["condition"], io::fixed(r["avg_event_sim"], 4),
                        io::fixed(r["coverage"], 4), io::fixed(r["ordering"], 4), io::fixed(r["structural"], 4),
                        std::to_string(r["events_truth"].get<std::size_t>()),
                        std::to_string(r["events_generated"].get<std::size_t>()),
                        std::to_string(r["aligned"].get<std::size_t>()),
                        std::to_string(r["event_overlap"].get<std::size_t>()), r["warning"]});
  }
  io::write_file_atomic(run.dir() / "structural.csv", csv);

  std::size_t empty_locations = 0;
  for (const auto& [id, s] : scorers) empty_locations += s->empty_location_matches();
  write_json_file(run.dir() / "structural_meta.json",
                  {{"empty_location_matches", empty_locations},
                   {"cosine", "negative cosines clamped to 0"},
                   {"embedder", embedder->backend()},
                   {"extractor", extractor->backend()}},
                  prov);
}

void Pipeline::judge() {
  Run run(config_);
  const auto candidates = run.candidates();
  const auto truths = run.truths();
  auto judge = run.generator(config_.judge_provider);
  judge::JudgeConfig jc;
  jc.retries = config_.judge_retries;
  jc.temperature = config_.judge_temperature;

  std::vector<json> rows(candidates.size());
  parallel_for(candidates.size(), config_.workers, [&](std::size_t i) {
    const auto& c = candidates[i];
    json row = key_json({c.novel_id, c.model_id, c.condition});
    const auto t = truths.find(c.novel_id);
    if (t == truths.end()) throw MissingArtifact("no ground truth for " + c.novel_id);
    try {
      const auto v = judge::judge_style(t->second, c.text, *judge, jc);
      row["score"] = v.score;
      row["rationale"] = v.rationale;
      row["attempts"] = v.attempts;
    } catch (const InvalidArgument& e) {
      row["error"] = std::string("judge: ") + e.what();
    } catch (const ProviderError& e) {
      row["error"] = std::string("judge: ") + e.what();
    }
    rows[i] = std::move(row);
  });
  const auto prov = run.prov(Stage::kJudge);
  io::write_jsonl(run.dir() / "style.jsonl", rows, prov);

  std::map<ConditionId, std::vector<double>> by_condition;
  std::map<std::string, std::vector<double>> by_model;
  std::size_t failures = 0;
  for (const auto& r : rows) {
    if (!r.contains("score")) {
      ++failures;
      continue;
    }
    by_condition[features::parse_condition(r["condition"].get<std::string>())].push_back(r["score"]);
    by_model[r["model"]].push_back(r["score"]);
  }
  std::string csv = prov.csv_header();
  csv += "# judge failures are gaps and are excluded from the means (" + std::to_string(failures) + ")\n";
  csv += io::csv_row({"Group", "Key", "Count", "Mean", "Std"});
  for (ConditionId c : config_.conditions) {
    const auto it = by_condition.find(c);
    if (it == by_condition.end()) continue;
    const auto s = judge::summarize(it->second);
    csv += io::csv_row({"condition", std::string(features::display_name(c)), std::to_string(s.count),
                        io::fixed(s.mean, 4), io::fixed(s.stddev, 4)});
  }
  for (const auto& [m, scores] : by_model) {
    const auto s = judge::summarize(scores);
    csv += io::csv_row({"model", m, std::to_string(s.count), io::fixed(s.mean, 4), io::fixed(s.stddev, 4)});
  }
  io::write_file_atomic(run.dir() / "style_summary.csv", csv);
}

namespace {

std::map<std::string, json> rows_by_key(const fs::path& path, std::string_view what) {
  io::require_file(path, what);
  std::map<std::string, json> out;
  for (auto& row : io::read_jsonl(path)) {
    const std::string key = key_string(key_from_json(row));
    out[key] = std::move(row);
  }
  return out;
}

}  // namespace

void Pipeline::study() {
  Run run(config_);
  const auto candidates = run.candidates();
  const auto style = rows_by_key(run.dir() / "style.jsonl", "style verdicts from `icsim judge`");
  const auto structural =
      rows_by_key(run.dir() / "structural.jsonl", "structural scores from `icsim structsim`");

  std::vector<study::StudyCandidate> pool;
  for (const auto& c : candidates) {
    const std::string k = key_string({c.novel_id, c.model_id, c.condition});
    const auto s = style.find(k);
    const auto t = structural.find(k);
    if (s == style.end() || t == structural.end() || !s->second.contains("score") ||
        !t->second.contains("structural")) {
      continue;
    }
    pool.push_back({c.novel_id, c.model_id, c.condition, s->second["score"], t->second["structural"], c.text});
  }
  const auto def = study::build_study(pool, run.truths(), config_.human_study.options);
  fs::create_directories(run.dir() / "study");
  write_json_file(run.dir() / "study" / "study.json", def.to_json(), run.prov(Stage::kStudy));
  spdlog::info("study: {} items", def.items.size());
}

void Pipeline::report() {
  Run run(config_);
  const auto candidates = run.candidates();
  const auto novels = run.novels();
  const auto style = rows_by_key(run.dir() / "style.jsonl", "style verdicts from `icsim judge`");
  const auto structural =
      rows_by_key(run.dir() / "structural.jsonl", "structural scores from `icsim structsim`");

  std::map<std::string, std::string> truths;
  std::map<std::string, structsim::AliasMap> aliases;
  analysis::ReportInput in;
  in.conditions = config_.conditions;
  for (const auto& n : novels) {
    truths[n.id] = n.truth.text;
    aliases.emplace(n.id, run.aliases(n.id));
    in.truth.push_back({n.id, analysis::lexical_diversity(n.truth.text, config_.ttr_window),
                        analysis::sentence_length_profile(n.truth.text, config_.sentence_bin).lengths});
  }

  std::set<std::string> gap_keys;
  auto add_gap = [&](const gen::CandidateKey& k) {
    if (gap_keys.insert(key_string(k)).second) in.gaps.push_back(k);
  };
  for (const auto& g : run.pretest_gaps()) add_gap(g);

  std::size_t judge_failures = 0, struct_failures = 0;
  in.rows.resize(candidates.size());
  std::vector<bool> missing(candidates.size(), false);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    const std::string k = key_string({c.novel_id, c.model_id, c.condition});
    auto& row = in.rows[i];
    row.novel_id = c.novel_id;
    row.model_id = c.model_id;
    row.condition = c.condition;
    if (const auto s = style.find(k); s != style.end() && s->second.contains("score")) {
      row.style = s->second["score"].get<double>();
    } else {
      ++judge_failures;
      missing[i] = true;
    }
    if (const auto t = structural.find(k); t != structural.end() && t->second.contains("structural")) {
      row.structural = t->second["structural"].get<double>();
      row.event_overlap = t->second["event_overlap"];
    } else {
      ++struct_failures;
      missing[i] = true;
    }
  }
  const auto& lexicon = run.lexicon();
  parallel_for(candidates.size(), config_.workers, [&](std::size_t i) {
    const auto& c = candidates[i];
    auto& row = in.rows[i];
    row.lexical_diversity = analysis::lexical_diversity(c.text, config_.ttr_window);
    row.sentiment_delta = analysis::sentiment_delta(c.text, truths.at(c.novel_id), lexicon);
    row.sentence_lengths = analysis::sentence_length_profile(c.text, config_.sentence_bin).lengths;
    const auto& a = aliases.at(c.novel_id);
    row.character_overlap = a.size() ? analysis::character_overlap(c.text, a) : 0;
  });
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (missing[i]) add_gap({candidates[i].novel_id, candidates[i].model_id, candidates[i].condition});
  }

  in.notes.push_back("Pretest: malformed or empty samples count as BLEU 0.");
  const fs::path pretest_json = run.dir() / "pretest.json";
  if (fs::exists(pretest_json)) {
    for (const auto& e : read_json_file(pretest_json, "pretest summary").at("excluded")) {
      std::string reasons;
      for (const auto& r : e.at("reasons")) reasons += (reasons.empty() ? "" : "; ") + r.get<std::string>();
      in.notes.push_back("Excluded in pretest: " + e.at("model").get<std::string>() + " (" + reasons + ").");
    }
  }
  in.notes.push_back("Judge failures: " + std::to_string(judge_failures) +
                     "; structural failures: " + std::to_string(struct_failures) +
                     ". Failed candidates are listed as gaps and left out of the means.");
  const fs::path meta = run.dir() / "structural_meta.json";
  if (fs::exists(meta)) {
    const auto m = read_json_file(meta, "structural metadata");
    in.notes.push_back("Negative embedding cosines are clamped to 0; empty-location matches scored 1: " +
                       std::to_string(m.at("empty_location_matches").get<std::size_t>()) + ".");
  }
  in.notes.push_back("Human-study selection score: style mapped to [0, 1] as (s - 1) / 4, averaged with the "
                     "structural score.");

  const fs::path def_path = run.dir() / "study" / "study.json";
  const fs::path ratings_path = run.dir() / "study" / "ratings.jsonl";
  if (fs::exists(def_path) && fs::exists(ratings_path)) {
    const auto def = study::StudyDefinition::from_json(read_json_file(def_path, "study definition"));
    std::vector<study::RatingRecord> ratings;
    for (const auto& r : io::read_jsonl(ratings_path)) ratings.push_back(study::RatingRecord::from_json(r));
    const auto res = study::aggregate_study(def, ratings);
    in.human = res.conditions;
    in.notes.push_back("Human ratings: " + std::to_string(ratings.size()) + " records; " +
                       std::to_string(res.excluded.size()) + " rater(s) excluded by attention checks.");
  } else {
    in.notes.push_back("No human ratings recorded yet.");
  }

  const auto files = analysis::render_report(in);
  analysis::write_report(files, run.dir() / "report");
}

void Pipeline::serve(std::optional<int> port) {
  const fs::path dir = run_dir() / "study";
  const auto def = study::StudyDefinition::from_json(
      read_json_file(dir / "study.json", "study definition from `icsim study`"));
  study::StudyService service(def, dir);
  study::ServerOptions opts;
  opts.port = port.value_or(config_.human_study.port);
  opts.admin_token = config_.human_study.admin_token;
  if (!config_.human_study.static_dir.empty()) opts.static_dir = config_.resolve(config_.human_study.static_dir);
  study::StudyServer server(service, opts);
  const int bound = server.start();
  spdlog::info("study service listening on {}:{} ({} items)", opts.host, bound, def.items.size());
  server.wait();
}

}  // namespace icsim::pipeline
