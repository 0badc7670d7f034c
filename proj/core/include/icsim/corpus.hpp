#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "icsim/text.hpp"

namespace icsim::corpus {

namespace fs = std::filesystem;

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  // Accepts mm/dd/yyyy (the dataset tables' format) or yyyy-mm-dd.
  static Date parse(std::string_view s);
  std::string iso() const;
  bool operator==(const Date&) const = default;
};

// 1-based, inclusive chapter indices.
struct ChapterRange {
  int first = 1;
  int last = 1;

  static ChapterRange parse(std::string_view spec);  // "3" or "1-3"
  bool overlaps(const ChapterRange& other) const { return first <= other.last && other.first <= last; }
  int size() const { return last - first + 1; }
  std::string str() const;
  bool operator==(const ChapterRange&) const = default;
};

struct ManifestEntry {
  std::string id;
  fs::path path;
  std::string title;
  std::string author_ref;
  std::string category;
  Date release_date;
  ChapterRange context_chapters;
  ChapterRange truth_chapters;
  std::size_t truncation_tokens = 8192;
  // When non-empty, used instead of heading detection.
  std::vector<std::size_t> chapter_offsets;
};

struct CorpusManifest {
  std::vector<ManifestEntry> novels;

  // INI-style: one [novel] block per work, `key = value` lines, '#' comments.
  // Relative paths resolve against the manifest's directory.
  static CorpusManifest load(const fs::path& path);
  static CorpusManifest parse(std::string_view content, const fs::path& base_dir);
};

struct NovelRecord {
  std::string id;
  std::string title;
  std::string author_ref;
  std::string category;
  Date release_date;
  std::string full_text;
  // Offsets of chapter heading lines, strictly increasing.
  std::vector<std::size_t> chapter_boundaries;

  std::size_t chapter_count() const { return chapter_boundaries.size(); }
  // Chapter body without its heading line, trimmed. `index` is 1-based.
  std::string_view chapter(int index) const;
};

enum class SegmentKind { kContext, kGroundTruth };

std::string_view to_string(SegmentKind kind);

struct Segment {
  std::string novel_id;
  SegmentKind kind = SegmentKind::kContext;
  std::string text;
  ChapterRange chapter_range;
  // Start of each chapter inside `text`, one per chapter that survived truncation.
  std::vector<std::size_t> chapter_offsets;
  std::size_t word_count = 0;
  std::size_t token_count = 0;
  bool truncated = false;

  // Chapter pieces of `text` paired with their absolute chapter number.
  std::vector<std::pair<int, std::string_view>> chapters() const;
};

struct TextStats {
  std::size_t word_count = 0;
  std::size_t token_count = 0;
  std::size_t sentence_count = 0;
  bool operator==(const TextStats&) const = default;
};

struct IngestOptions {
  std::string chapter_pattern = R"(^(CHAPTER|Chapter)\s+\w+)";
};

std::vector<std::size_t> detect_chapters(std::string_view text, const std::string& pattern);

NovelRecord ingest_novel(const fs::path& path, const ManifestEntry& entry,
                         const IngestOptions& options = {});
// Same as ingest_novel, for text already in memory.
NovelRecord make_novel(std::string text, const ManifestEntry& entry,
                       const IngestOptions& options = {});

// Returns (context, ground truth). Only the context is truncated.
std::pair<Segment, Segment> split_segments(const NovelRecord& novel, const ManifestEntry& entry,
                                           const text::Tokenizer& tokenizer = text::default_tokenizer());

// Longest prefix ending on a sentence boundary whose token count is <= limit.
// Falls back to a token boundary when the first sentence alone is too long.
std::string_view truncate_to_tokens(std::string_view text, std::size_t limit,
                                    const text::Tokenizer& tokenizer = text::default_tokenizer());

TextStats text_stats(std::string_view text,
                     const text::Tokenizer& tokenizer = text::default_tokenizer());

}  // namespace icsim::corpus
