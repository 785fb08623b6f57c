#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "crisiskit/emoji_table.hpp"

namespace crisiskit {

/// Normalized text: no raw URLs, no raw @mentions, no HTML entities, no
/// newlines, no consecutive whitespace.
struct CleanText {
  std::string text;

  bool operator==(const CleanText&) const = default;
};

inline constexpr std::string_view kUrlToken = "HTTPURL";
inline constexpr std::string_view kUserToken = "@USER";

namespace normdetail {

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '_';
}

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp <= 0x7F) {
    out.push_back(char(cp));
  } else if (cp <= 0x7FF) {
    out.push_back(char(0xC0 | (cp >> 6)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  } else if (cp <= 0xFFFF) {
    out.push_back(char(0xE0 | (cp >> 12)));
    out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(char(0xF0 | (cp >> 18)));
    out.push_back(char(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(char(0x80 | (cp & 0x3F)));
  }
}

/// Decodes one codepoint at s[i]; advances i. Malformed bytes decode to
/// U+FFFD one byte at a time.
inline std::uint32_t next_codepoint(std::string_view s, size_t& i) {
  const unsigned char b0 = s[i];
  size_t len = 0;
  std::uint32_t cp = 0;
  if (b0 < 0x80) {
    ++i;
    return b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + len > s.size()) {
    ++i;
    return 0xFFFD;
  }
  for (size_t k = 1; k < len; ++k) {
    const unsigned char bk = s[i + k];
    if ((bk & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (bk & 0x3F);
  }
  i += len;
  return cp;
}

inline bool is_unicode_space(std::uint32_t cp) {
  return cp == 0x20 || cp == 0x09 || cp == 0x0A || cp == 0x0B || cp == 0x0C ||
         cp == 0x0D || cp == 0xA0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) ||
         cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

inline bool match_icase(std::string_view s, size_t pos, std::string_view lit) {
  if (pos + lit.size() > s.size()) return false;
  for (size_t k = 0; k < lit.size(); ++k) {
    char a = s[pos + k];
    if (a >= 'A' && a <= 'Z') a = char(a - 'A' + 'a');
    if (a != lit[k]) return false;
  }
  return true;
}

inline std::string replace_urls(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    const bool hit = match_icase(s, i, "https://") || match_icase(s, i, "http://");
    if (hit) {
      while (i < s.size() && !is_ascii_space(s[i])) ++i;
      out += kUrlToken;
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

inline std::string replace_mentions(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '@' && i + 1 < s.size() && is_word_char(s[i + 1])) {
      i += 1;
      while (i < s.size() && is_word_char(s[i])) ++i;
      out += kUserToken;
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

inline const std::unordered_map<std::string, std::uint32_t>& named_entities() {
  static const std::unordered_map<std::string, std::uint32_t> table = {
      {"amp", '&'},      {"lt", '<'},      {"gt", '>'},      {"quot", '"'},
      {"apos", '\''},    {"nbsp", ' '},    {"ndash", 0x2013}, {"mdash", 0x2014},
      {"hellip", 0x2026}, {"rsquo", 0x2019}, {"lsquo", 0x2018}, {"rdquo", 0x201D},
      {"ldquo", 0x201C}, {"middot", 0xB7}, {"bull", 0x2022}, {"deg", 0xB0},
      {"copy", 0xA9},    {"reg", 0xAE},    {"trade", 0x2122}, {"laquo", 0xAB},
      {"raquo", 0xBB},   {"times", 0xD7},  {"divide", 0xF7}, {"pound", 0xA3},
      {"euro", 0x20AC},  {"yen", 0xA5},    {"cent", 0xA2},
  };
  return table;
}

inline std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    size_t j = i + 1;
    if (j < s.size() && s[j] == '#') {
      // numeric entity
      ++j;
      bool hex = j < s.size() && (s[j] == 'x' || s[j] == 'X');
      if (hex) ++j;
      std::uint64_t cp = 0;
      size_t digits = 0;
      while (j < s.size() && cp <= 0x10FFFF) {
        char c = s[j];
        int d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (hex && c >= 'a' && c <= 'f') d = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') d = c - 'A' + 10;
        else break;
        cp = cp * (hex ? 16 : 10) + d;
        ++digits;
        ++j;
      }
      if (digits > 0 && j < s.size() && s[j] == ';' && cp <= 0x10FFFF &&
          !(cp >= 0xD800 && cp <= 0xDFFF) && cp != 0) {
        append_utf8(out, std::uint32_t(cp));
        i = j + 1;
        continue;
      }
      out.push_back(s[i++]);
      continue;
    }
    size_t k = j;
    while (k < s.size() && ((s[k] >= 'a' && s[k] <= 'z') || (s[k] >= 'A' && s[k] <= 'Z') ||
                            (s[k] >= '0' && s[k] <= '9')))
      ++k;
    if (k > j && k < s.size() && s[k] == ';') {
      std::string name(s.substr(j, k - j));
      auto it = named_entities().find(name);
      if (it != named_entities().end()) {
        append_utf8(out, it->second);
        i = k + 1;
        continue;
      }
      bool all_lower = true;
      for (char c : name)
        if (!(c >= 'a' && c <= 'z')) all_lower = false;
      if (all_lower) {
        // unknown lowercase entity: drop it so no entity pattern survives
        out.push_back(' ');
        i = k + 1;
        continue;
      }
    }
    out.push_back(s[i++]);
  }
  return out;
}

inline std::string replace_emoji(std::string_view s) {
  const auto& table = emoji_shortcodes();
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    size_t start = i;
    std::uint32_t cp = next_codepoint(s, i);
    auto it = table.find(cp);
    if (it == table.end()) {
      out.append(s.substr(start, i - start));
      continue;
    }
    out.push_back(':');
    out += it->second;
    out.push_back(':');
    // swallow variation selector / skin tone attached to the match
    while (i < s.size()) {
      size_t save = i;
      std::uint32_t follow = next_codepoint(s, i);
      if (follow == 0xFE0F || (follow >= 0x1F3FB && follow <= 0x1F3FF)) continue;
      i = save;
      break;
    }
  }
  return out;
}

inline std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  bool pending_space = false;
  while (i < s.size()) {
    size_t start = i;
    std::uint32_t cp = next_codepoint(s, i);
    if (is_unicode_space(cp)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.append(s.substr(start, i - start));
  }
  return out;
}

inline std::string normalize_pass(std::string_view s) {
  std::string t = replace_urls(s);
  t = replace_mentions(t);
  t = decode_entities(t);
  t = replace_emoji(t);
  return collapse_whitespace(t);
}

}  // namespace normdetail

/// Rule order per pass: URLs -> @mentions -> HTML entities -> emoji ->
/// whitespace. The pass repeats until the text stops changing, so content
/// uncovered by entity decoding (e.g. "&#64;user") is still caught.
inline CleanText normalize_text(std::string_view raw) {
  std::string cur(raw);
  for (int iter = 0; iter < 8; ++iter) {
    std::string next = normdetail::normalize_pass(cur);
    if (next == cur) break;
    cur = std::move(next);
  }
  return CleanText{std::move(cur)};
}

}  // namespace crisiskit
