#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace icsim::io {

namespace fs = std::filesystem;
using nlohmann::json;

// Stage name, stage version, and config hash stamped into every artifact.
struct Provenance {
  std::string stage;
  std::string stage_version = "1";
  std::string config_hash;

  std::string csv_header() const;  // "# icsim stage=... version=... config=...\n"
  json record() const;             // {"_provenance": {...}}
};

std::string read_file(const fs::path& path);
// Write to a sibling temp file and rename over the target.
void write_file_atomic(const fs::path& path, std::string_view content);
void require_file(const fs::path& path, std::string_view what);

std::vector<json> read_jsonl(const fs::path& path);
void write_jsonl(const fs::path& path, const std::vector<json>& rows, const Provenance& prov);

// Append-only newline-delimited JSON log. Appends are serialized and flushed,
// so many threads may share one instance.
class JsonlAppender {
 public:
  explicit JsonlAppender(const fs::path& path);
  void append(const json& row);
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
  std::mutex mu_;
  std::ofstream out_;
};

std::string csv_field(std::string_view value);
std::string csv_row(const std::vector<std::string>& fields);
// Rows of a CSV file; lines starting with '#' are skipped, the header row is kept.
std::vector<std::vector<std::string>> read_csv(const fs::path& path);

std::string fixed(double value, int decimals);

// First balanced {...} in `text` that parses as JSON, ignoring braces inside
// string literals. Model responses often wrap JSON in prose or code fences.
std::optional<json> find_json_object(std::string_view text);

}  // namespace icsim::io
