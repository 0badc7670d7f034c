#include "icsim/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace icsim::text {
namespace {

bool is_space_cp(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' ||
         c == 0xA0 || (c >= 0x2000 && c <= 0x200B) || c == 0x3000;
}

bool is_punct_cp(char32_t c) {
  if (c < 0x80) return std::ispunct(static_cast<unsigned char>(c)) != 0;
  return (c >= 0xA1 && c <= 0xBF) || c == 0xD7 || c == 0xF7 || (c >= 0x2010 && c <= 0x206F) ||
         (c >= 0x20A0 && c <= 0x20CF) || (c >= 0x2190 && c <= 0x2BFF) ||
         (c >= 0x3000 && c <= 0x303F) || c == 0xFFFD;
}

bool is_word_cp(char32_t c) {
  if (c < 0x80) return std::isalnum(static_cast<unsigned char>(c)) != 0;
  return !is_space_cp(c) && !is_punct_cp(c);
}

bool is_apostrophe(char32_t c) { return c == U'\'' || c == 0x2019; }

bool is_terminator(char32_t c) { return c == U'.' || c == U'!' || c == U'?' || c == 0x2026; }

bool is_closer(char32_t c) {
  return c == U'"' || c == U'\'' || c == U')' || c == U']' || c == 0x201D || c == 0x2019;
}

}  // namespace

std::vector<std::string> Tokenizer::tokenize(std::string_view text) const {
  std::vector<std::string> out;
  for (const Span& s : spans(text)) out.emplace_back(s.view(text));
  return out;
}

std::vector<Span> WordPunctTokenizer::spans(std::string_view text) const {
  std::vector<Span> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    const char32_t c = decode_utf8(text, pos);
    if (is_space_cp(c)) continue;
    if (!is_word_cp(c)) {
      out.push_back({start, pos - start});
      continue;
    }
    // Extend the word; an apostrophe joins only when a word character follows.
    std::size_t end = pos;
    while (end < text.size()) {
      std::size_t probe = end;
      const char32_t next = decode_utf8(text, probe);
      if (is_word_cp(next)) {
        end = probe;
        continue;
      }
      if (is_apostrophe(next) && probe < text.size()) {
        std::size_t after = probe;
        if (is_word_cp(decode_utf8(text, after))) {
          end = after;
          continue;
        }
      }
      break;
    }
    out.push_back({start, end - start});
    pos = end;
  }
  return out;
}

const Tokenizer& default_tokenizer() {
  static const WordPunctTokenizer instance;
  return instance;
}

std::size_t count_words(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (char ch : text) {
    const bool space = std::isspace(static_cast<unsigned char>(ch)) != 0;
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

std::vector<Span> split_sentences(std::string_view text) {
  std::vector<Span> out;
  auto emit = [&](std::size_t begin, std::size_t end) {
    std::string_view piece = text.substr(begin, end - begin);
    std::string_view trimmed = trim(piece);
    if (trimmed.empty()) return;
    std::size_t probe = 0;
    bool has_word = false;
    while (probe < trimmed.size() && !has_word) has_word = is_word_cp(decode_utf8(trimmed, probe));
    if (!has_word) return;
    const std::size_t offset = static_cast<std::size_t>(trimmed.data() - text.data());
    out.push_back({offset, trimmed.size()});
  };

  std::size_t start = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t probe = pos;
    const char32_t c = decode_utf8(text, probe);
    if (is_terminator(c)) {
      std::size_t end = probe;
      while (end < text.size()) {
        std::size_t look = end;
        const char32_t n = decode_utf8(text, look);
        if (!is_terminator(n) && !is_closer(n)) break;
        end = look;
      }
      std::size_t look = end;
      if (end == text.size() || is_space_cp(decode_utf8(text, look))) {
        emit(start, end);
        start = end;
      }
      pos = end;
      continue;
    }
    if (c == U'\n') {
      std::size_t look = probe;
      while (look < text.size() && (text[look] == ' ' || text[look] == '\t' || text[look] == '\r')) ++look;
      if (look < text.size() && text[look] == '\n') {
        emit(start, pos);
        start = look;
        pos = look;
        continue;
      }
    }
    pos = probe;
  }
  emit(start, text.size());
  return out;
}

bool is_word_token(std::string_view token) {
  std::size_t pos = 0;
  while (pos < token.size()) {
    if (is_word_cp(decode_utf8(token, pos))) return true;
  }
  return false;
}

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  for (const Span& s : default_tokenizer().spans(text)) {
    std::string_view tok = s.view(text);
    if (is_word_token(tok)) out.push_back(to_lower(tok));
  }
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string to_upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  auto space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && space(s.front())) s.remove_prefix(1);
  while (!s.empty() && space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t at = s.find(sep, start);
    if (at == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, at - start));
    start = at + 1;
  }
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t count = 0;
  for (std::size_t at = haystack.find(needle); at != std::string_view::npos;
       at = haystack.find(needle, at + 1)) {
    ++count;
  }
  return count;
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t state = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  return splitmix64(state);
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

char32_t decode_utf8(std::string_view s, std::size_t& pos) {
  const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
  const unsigned char b0 = byte(pos);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  int extra = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    extra = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    extra = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    extra = 3;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return 0xFFFD;
  }
  if (pos + extra >= s.size()) {
    ++pos;
    return 0xFFFD;
  }
  for (int k = 1; k <= extra; ++k) {
    const unsigned char b = byte(pos + k);
    if ((b & 0xC0) != 0x80) {
      ++pos;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  pos += static_cast<std::size_t>(extra) + 1;
  return cp;
}

bool is_valid_utf8(std::string_view s) {
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t before = pos;
    const char32_t cp = decode_utf8(s, pos);
    if (cp == 0xFFFD) {
      // A literal U+FFFD is three bytes; anything else was an invalid sequence.
      if (pos - before != 3) return false;
    }
  }
  return true;
}

}  // namespace icsim::text
