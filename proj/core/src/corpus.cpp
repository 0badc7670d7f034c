#include "icsim/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <regex>

#include "icsim/error.hpp"
#include "icsim/io.hpp"

namespace icsim::corpus {
namespace {

int parse_int(std::string_view s, std::string_view what) {
  s = text::trim(s);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw InvalidArgument("invalid " + std::string(what) + ": '" + std::string(s) + "'");
  }
  return value;
}

std::size_t parse_size(std::string_view s, std::string_view what) {
  const int v = parse_int(s, what);
  if (v < 0) throw InvalidArgument(std::string(what) + " must be non-negative");
  return static_cast<std::size_t>(v);
}

void validate_entry(const ManifestEntry& e) {
  if (e.id.empty()) throw InvalidArgument("manifest entry without id");
  if (e.path.empty()) throw InvalidArgument("manifest entry '" + e.id + "' has no path");
  if (e.context_chapters.overlaps(e.truth_chapters)) {
    throw InvalidArgument("manifest entry '" + e.id + "': context chapters " + e.context_chapters.str() +
                          " overlap ground-truth chapters " + e.truth_chapters.str());
  }
  if (e.truncation_tokens < 1) {
    throw InvalidArgument("manifest entry '" + e.id + "': truncation limit must be >= 1");
  }
}

void check_boundaries(const NovelRecord& r) {
  for (std::size_t i = 0; i < r.chapter_boundaries.size(); ++i) {
    if (r.chapter_boundaries[i] >= r.full_text.size() ||
        (i > 0 && r.chapter_boundaries[i] <= r.chapter_boundaries[i - 1])) {
      throw InvalidArgument("novel '" + r.id + "': chapter boundaries must be strictly increasing and inside the text");
    }
  }
}

// Concatenates chapters [first, last] with blank-line separators.
std::pair<std::string, std::vector<std::size_t>> gather(const NovelRecord& novel, const ChapterRange& range) {
  if (range.first < 1 || range.last < range.first ||
      static_cast<std::size_t>(range.last) > novel.chapter_count()) {
    throw InvalidArgument("novel '" + novel.id + "' has " + std::to_string(novel.chapter_count()) +
                          " chapters; cannot take " + range.str());
  }
  std::string out;
  std::vector<std::size_t> offsets;
  for (int c = range.first; c <= range.last; ++c) {
    if (!out.empty()) out += "\n\n";
    offsets.push_back(out.size());
    out += novel.chapter(c);
  }
  return {std::move(out), std::move(offsets)};
}

}  // namespace

Date Date::parse(std::string_view s) {
  s = text::trim(s);
  Date d;
  if (s.find('/') != std::string_view::npos) {
    const auto parts = text::split(s, '/');
    if (parts.size() != 3) throw InvalidArgument("invalid date: '" + std::string(s) + "'");
    d.month = parse_int(parts[0], "month");
    d.day = parse_int(parts[1], "day");
    d.year = parse_int(parts[2], "year");
  } else {
    const auto parts = text::split(s, '-');
    if (parts.size() != 3) throw InvalidArgument("invalid date: '" + std::string(s) + "'");
    d.year = parse_int(parts[0], "year");
    d.month = parse_int(parts[1], "month");
    d.day = parse_int(parts[2], "day");
  }
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) {
    throw InvalidArgument("invalid date: '" + std::string(s) + "'");
  }
  return d;
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

ChapterRange ChapterRange::parse(std::string_view spec) {
  spec = text::trim(spec);
  ChapterRange r;
  const auto dash = spec.find('-');
  if (dash == std::string_view::npos) {
    r.first = r.last = parse_int(spec, "chapter spec");
  } else {
    r.first = parse_int(spec.substr(0, dash), "chapter spec");
    r.last = parse_int(spec.substr(dash + 1), "chapter spec");
  }
  if (r.first < 1 || r.last < r.first) {
    throw InvalidArgument("invalid chapter spec: '" + std::string(spec) + "'");
  }
  return r;
}

std::string ChapterRange::str() const {
  return first == last ? std::to_string(first) : std::to_string(first) + "-" + std::to_string(last);
}

CorpusManifest CorpusManifest::load(const fs::path& path) {
  return parse(io::read_file(path), path.parent_path());
}

CorpusManifest CorpusManifest::parse(std::string_view content, const fs::path& base_dir) {
  CorpusManifest manifest;
  ManifestEntry* current = nullptr;
  std::size_t lineno = 0;
  for (const std::string& raw : text::split(content, '\n')) {
    ++lineno;
    const std::string_view line = text::trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    const std::string where = "manifest line " + std::to_string(lineno);
    if (line.front() == '[') {
      if (line != "[novel]") throw InvalidArgument(where + ": unknown section " + std::string(line));
      current = &manifest.novels.emplace_back();
      continue;
    }
    if (current == nullptr) throw InvalidArgument(where + ": key outside a [novel] block");
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw InvalidArgument(where + ": expected key = value");
    const std::string key(text::trim(line.substr(0, eq)));
    const std::string value(text::trim(line.substr(eq + 1)));
    if (key == "id") {
      current->id = value;
    } else if (key == "path") {
      fs::path p(value);
      current->path = p.is_absolute() ? p : base_dir / p;
    } else if (key == "title") {
      current->title = value;
    } else if (key == "author") {
      current->author_ref = value;
    } else if (key == "category") {
      current->category = value;
    } else if (key == "release_date") {
      current->release_date = Date::parse(value);
    } else if (key == "context_chapters") {
      current->context_chapters = ChapterRange::parse(value);
    } else if (key == "truth_chapters") {
      current->truth_chapters = ChapterRange::parse(value);
    } else if (key == "truncation_tokens") {
      current->truncation_tokens = parse_size(value, "truncation_tokens");
    } else if (key == "chapter_offsets") {
      current->chapter_offsets.clear();
      for (const std::string& part : text::split(value, ',')) {
        current->chapter_offsets.push_back(parse_size(part, "chapter offset"));
      }
    } else {
      throw InvalidArgument(where + ": unknown key '" + key + "'");
    }
  }
  for (const ManifestEntry& e : manifest.novels) {
    validate_entry(e);
    if (!fs::exists(e.path)) throw InvalidArgument("manifest entry '" + e.id + "': file not found " + e.path.string());
  }
  return manifest;
}

std::string_view NovelRecord::chapter(int index) const {
  if (index < 1 || static_cast<std::size_t>(index) > chapter_boundaries.size()) {
    throw InvalidArgument("chapter index out of range: " + std::to_string(index));
  }
  const std::size_t begin = chapter_boundaries[index - 1];
  const std::size_t end = static_cast<std::size_t>(index) < chapter_boundaries.size()
                              ? chapter_boundaries[index]
                              : full_text.size();
  std::string_view body = std::string_view(full_text).substr(begin, end - begin);
  const auto nl = body.find('\n');
  body = nl == std::string_view::npos ? std::string_view{} : body.substr(nl + 1);
  return text::trim(body);
}

std::string_view to_string(SegmentKind kind) {
  return kind == SegmentKind::kContext ? "context" : "ground_truth";
}

std::vector<std::pair<int, std::string_view>> Segment::chapters() const {
  std::vector<std::pair<int, std::string_view>> out;
  const std::string_view all(text);
  for (std::size_t i = 0; i < chapter_offsets.size(); ++i) {
    const std::size_t begin = chapter_offsets[i];
    const std::size_t end = i + 1 < chapter_offsets.size() ? chapter_offsets[i + 1] : all.size();
    out.emplace_back(chapter_range.first + static_cast<int>(i), text::trim(all.substr(begin, end - begin)));
  }
  return out;
}

std::vector<std::size_t> detect_chapters(std::string_view body, const std::string& pattern) {
  std::regex heading;
  try {
    heading = std::regex(pattern, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw InvalidArgument("invalid chapter pattern '" + pattern + "': " + e.what());
  }
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start < body.size()) {
    std::size_t end = body.find('\n', start);
    if (end == std::string_view::npos) end = body.size();
    std::string line(body.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (std::regex_search(line, heading, std::regex_constants::match_continuous)) out.push_back(start);
    start = end + 1;
  }
  return out;
}

NovelRecord make_novel(std::string full_text, const ManifestEntry& entry, const IngestOptions& options) {
  if (text::trim(full_text).empty()) throw InvalidArgument("empty document: " + entry.path.string());
  if (!text::is_valid_utf8(full_text)) throw InvalidArgument("invalid UTF-8: " + entry.path.string());
  NovelRecord r;
  r.id = entry.id;
  r.title = entry.title;
  r.author_ref = entry.author_ref;
  r.category = entry.category;
  r.release_date = entry.release_date;
  r.full_text = std::move(full_text);
  r.chapter_boundaries =
      entry.chapter_offsets.empty() ? detect_chapters(r.full_text, options.chapter_pattern) : entry.chapter_offsets;
  if (r.chapter_boundaries.empty()) throw InvalidArgument("zero chapters detected in " + entry.path.string());
  check_boundaries(r);
  return r;
}

NovelRecord ingest_novel(const fs::path& path, const ManifestEntry& entry, const IngestOptions& options) {
  std::string content;
  try {
    content = io::read_file(path);
  } catch (const MissingArtifact&) {
    throw InvalidArgument("unreadable file: " + path.string());
  }
  ManifestEntry located = entry;
  located.path = path;
  return make_novel(std::move(content), located, options);
}

std::string_view truncate_to_tokens(std::string_view body, std::size_t limit, const text::Tokenizer& tokenizer) {
  if (limit < 1) throw InvalidArgument("truncation limit must be >= 1");
  const auto tokens = tokenizer.spans(body);
  if (tokens.size() <= limit) return body;
  const std::size_t cut = tokens[limit - 1].end();
  std::size_t best = 0;
  for (const text::Span& s : text::split_sentences(body)) {
    if (s.end() <= cut) best = s.end();
  }
  if (best == 0) best = cut;
  return body.substr(0, best);
}

std::pair<Segment, Segment> split_segments(const NovelRecord& novel, const ManifestEntry& entry,
                                           const text::Tokenizer& tokenizer) {
  if (entry.context_chapters.overlaps(entry.truth_chapters)) {
    throw InvalidArgument("context and ground-truth chapter specs overlap for '" + novel.id + "'");
  }
  if (entry.truncation_tokens < 1) throw InvalidArgument("truncation limit must be >= 1");

  Segment context;
  context.novel_id = novel.id;
  context.kind = SegmentKind::kContext;
  context.chapter_range = entry.context_chapters;
  std::tie(context.text, context.chapter_offsets) = gather(novel, entry.context_chapters);
  const std::string_view kept = truncate_to_tokens(context.text, entry.truncation_tokens, tokenizer);
  if (kept.size() < context.text.size()) {
    context.text.resize(kept.size());
    context.truncated = true;
    std::erase_if(context.chapter_offsets, [&](std::size_t off) { return off >= context.text.size(); });
    context.chapter_range.last = context.chapter_range.first + static_cast<int>(context.chapter_offsets.size()) - 1;
  }

  Segment truth;
  truth.novel_id = novel.id;
  truth.kind = SegmentKind::kGroundTruth;
  truth.chapter_range = entry.truth_chapters;
  std::tie(truth.text, truth.chapter_offsets) = gather(novel, entry.truth_chapters);

  for (Segment* s : {&context, &truth}) {
    s->word_count = text::count_words(s->text);
    s->token_count = tokenizer.count(s->text);
  }
  return {std::move(context), std::move(truth)};
}

TextStats text_stats(std::string_view body, const text::Tokenizer& tokenizer) {
  return {text::count_words(body), tokenizer.count(body), text::split_sentences(body).size()};
}

}  // namespace icsim::corpus
