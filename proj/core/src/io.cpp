#include "icsim/io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "icsim/error.hpp"

namespace icsim::io {

std::string Provenance::csv_header() const {
  return "# icsim stage=" + stage + " version=" + stage_version + " config=" + config_hash + "\n";
}

json Provenance::record() const {
  return json{{"_provenance", {{"stage", stage}, {"version", stage_version}, {"config", config_hash}}}};
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (!fs::exists(path)) throw MissingArtifact("file not found: " + path.string());
    throw InvalidArgument("cannot read file: " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write file: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("short write: " + tmp.string());
  }
  fs::rename(tmp, path);
}

void require_file(const fs::path& path, std::string_view what) {
  if (!fs::exists(path)) {
    throw MissingArtifact(std::string(what) + " not found: " + path.string());
  }
}

std::vector<json> read_jsonl(const fs::path& path) {
  const std::string content = read_file(path);
  std::vector<json> rows;
  std::istringstream in(content);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (row.is_object() && row.contains("_provenance")) continue;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_jsonl(const fs::path& path, const std::vector<json>& rows, const Provenance& prov) {
  std::string out = prov.record().dump() + "\n";
  for (const json& row : rows) out += row.dump() + "\n";
  write_file_atomic(path, out);
}

JsonlAppender::JsonlAppender(const fs::path& path) : path_(path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  out_.open(path, std::ios::app | std::ios::binary);
  if (!out_) throw Error("cannot open log for append: " + path.string());
}

void JsonlAppender::append(const json& row) {
  const std::string line = row.dump() + "\n";
  std::lock_guard lock(mu_);
  out_ << line;
  out_.flush();
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  out += '\n';
  return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  const std::string content = read_file(path);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool at_line_start = true;
  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (at_line_start && !quoted && c == '#') {
      while (i < content.size() && content[i] != '\n') ++i;
      continue;
    }
    at_line_start = false;
    if (quoted) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      at_line_start = true;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (!field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string fixed(double value, int decimals) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s = buf;
  if (s.size() > 1 && s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::optional<json> find_json_object(std::string_view text) {
  for (std::size_t start = text.find('{'); start != std::string_view::npos; start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}' && --depth == 0) {
        json j = json::parse(text.substr(start, i - start + 1), nullptr, false);
        if (!j.is_discarded()) return j;
        break;
      }
    }
  }
  return std::nullopt;
}

}  // namespace icsim::io
