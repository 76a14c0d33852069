#include "xsteer/text.hpp"

#include <algorithm>
#include <cstdint>
#include <map>

namespace xsteer {

namespace {

// Minimal UTF-8 decoder; malformed bytes come back as U+FFFD one at a time.
std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    const unsigned char b0 = static_cast<unsigned char>(s[i]);
    int len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
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
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    if (i + static_cast<size_t>(len) > s.size()) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      const unsigned char bk = static_cast<unsigned char>(s[i + static_cast<size_t>(k)]);
      if ((bk & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (bk & 0x3F);
    }
    if (!ok) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<size_t>(len);
  }
  return out;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

char32_t fold_case(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 0x20;
  // Latin-1 supplement uppercase, skipping the multiplication sign
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  // Greek capital letters
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
  // Cyrillic: А..Я then the Ѐ..Џ block
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

bool is_space(char32_t c) {
  switch (c) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0xA0: case 0x1680: case 0x2028: case 0x2029: case 0x202F:
    case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool is_punct(char32_t c) {
  if ((c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
      (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E))
    return true;  // ASCII punctuation
  if (c == 0xA1 || c == 0xBF || c == 0xAB || c == 0xBB) return true;  // ¡ ¿ « »
  if (c >= 0x2000 && c <= 0x206F) return true;  // general punctuation block
  if (c >= 0x3001 && c <= 0x303F) return true;  // CJK symbols and punctuation
  if ((c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) ||
      (c >= 0xFF3B && c <= 0xFF40) || (c >= 0xFF5B && c <= 0xFF65))
    return true;  // fullwidth punctuation
  if (c == 0x60C || c == 0x61B || c == 0x61F || c == 0x6D4) return true;  // Arabic
  return false;
}

}  // namespace

std::vector<std::string> normalize_tokens(std::string_view text) {
  const std::vector<char32_t> cps = decode_utf8(text);
  std::vector<std::string> tokens;
  std::string cur;
  for (char32_t c : cps) {
    // punctuation separates tokens rather than gluing neighbours together
    if (is_space(c) || is_punct(c)) {
      if (!cur.empty()) {
        tokens.push_back(std::move(cur));
        cur.clear();
      }
      continue;
    }
    // Full-fold the sharp s so GROSS/größe-style pairs compare equal; the
    // one-to-one table below cannot express it.
    if (c == 0xDF || c == 0x1E9E) {
      cur += "ss";
      continue;
    }
    encode_utf8(fold_case(c), cur);
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

double token_f1(std::string_view pred, std::string_view gold) {
  const std::vector<std::string> p = normalize_tokens(pred);
  const std::vector<std::string> g = normalize_tokens(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;

  std::map<std::string, int> counts;
  for (const std::string& t : g) ++counts[t];
  std::int64_t overlap = 0;
  for (const std::string& t : p) {
    const auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / static_cast<double>(p.size());
  const double recall = static_cast<double>(overlap) / static_cast<double>(g.size());
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace xsteer
