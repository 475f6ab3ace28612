#include "pairjudge/text.hpp"

#include <array>
#include <utility>

#include "pairjudge/error.hpp"

namespace pairjudge::text {

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    char32_t cp = 0;
    std::size_t extra = 0;
    if (c < 0x80) {
      cp = c;
    } else if ((c & 0xe0) == 0xc0) {
      cp = c & 0x1f;
      extra = 1;
    } else if ((c & 0xf0) == 0xe0) {
      cp = c & 0x0f;
      extra = 2;
    } else if ((c & 0xf8) == 0xf0) {
      cp = c & 0x07;
      extra = 3;
    } else {
      // stray continuation or invalid lead byte
      out.push_back(0xfffd);
      ++i;
      continue;
    }
    bool ok = true;
    for (std::size_t k = 1; k <= extra; ++k) {
      if (i + k >= s.size()) {
        ok = false;
        break;
      }
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xc0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cc & 0x3f);
    }
    if (!ok) {
      out.push_back(0xfffd);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

std::string encode_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
  return out;
}

std::string encode_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : s) out += encode_utf8(cp);
  return out;
}

bool is_cjk(char32_t cp) noexcept {
  return (cp >= 0x4e00 && cp <= 0x9fff) ||   // unified ideographs
         (cp >= 0x3400 && cp <= 0x4dbf) ||   // extension A
         (cp >= 0x20000 && cp <= 0x2ebef) || // extensions B-F
         (cp >= 0xf900 && cp <= 0xfaff) ||   // compatibility ideographs
         (cp >= 0x3040 && cp <= 0x30ff) ||   // kana
         (cp >= 0xac00 && cp <= 0xd7af) ||   // hangul syllables
         (cp >= 0x3000 && cp <= 0x303f && cp != 0x3000) ||  // CJK punctuation
         (cp >= 0xff00 && cp <= 0xffef);     // fullwidth forms
}

bool is_space(char32_t cp) noexcept {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\v' || cp == '\f' ||
         cp == 0x85 || cp == 0xa0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200a) ||
         cp == 0x2028 || cp == 0x2029 || cp == 0x202f || cp == 0x205f || cp == 0x3000;
}

Unit detect_unit(std::string_view s) {
  std::size_t cjk = 0;
  std::size_t visible = 0;
  for (char32_t cp : decode_utf8(s)) {
    if (is_space(cp)) continue;
    ++visible;
    if (is_cjk(cp)) ++cjk;
  }
  return (visible > 0 && 2 * cjk >= visible) ? Unit::CodePoint : Unit::Word;
}

std::vector<std::string> split_units(std::string_view s, Unit unit) {
  std::vector<std::string> units;
  const auto cps = decode_utf8(s);
  if (unit == Unit::CodePoint) {
    for (char32_t cp : cps) {
      if (!is_space(cp)) units.push_back(encode_utf8(cp));
    }
    return units;
  }
  std::u32string word;
  for (char32_t cp : cps) {
    if (is_space(cp)) {
      if (!word.empty()) units.push_back(encode_utf8(word));
      word.clear();
    } else {
      word.push_back(cp);
    }
  }
  if (!word.empty()) units.push_back(encode_utf8(word));
  return units;
}

std::size_t unit_length(std::string_view s) {
  return split_units(s, detect_unit(s)).size();
}

std::size_t codepoint_length(std::string_view s) { return decode_utf8(s).size(); }

std::string trim(std::string_view s) {
  const auto cps = decode_utf8(s);
  std::size_t b = 0;
  std::size_t e = cps.size();
  while (b < e && is_space(cps[b])) ++b;
  while (e > b && is_space(cps[e - 1])) --e;
  return encode_utf8(std::u32string_view(cps).substr(b, e - b));
}

std::string strip_wrappers(std::string_view s) {
  static constexpr std::array<std::pair<char32_t, char32_t>, 8> kPairs{{
      {U'"', U'"'},
      {U'\'', U'\''},
      {U'`', U'`'},
      {0x201c, 0x201d},  // “ ”
      {0x2018, 0x2019},  // ‘ ’
      {0x300c, 0x300d},  // 「 」
      {0x300e, 0x300f},  // 『 』
      {0x00ab, 0x00bb},  // « »
  }};
  std::u32string cps = decode_utf8(trim(s));
  bool changed = true;
  while (changed && cps.size() >= 2) {
    changed = false;
    for (auto [open, close] : kPairs) {
      if (cps.front() == open && cps.back() == close) {
        cps = decode_utf8(trim(encode_utf8(std::u32string_view(cps).substr(1, cps.size() - 2))));
        changed = true;
        break;
      }
    }
  }
  return encode_utf8(cps);
}

std::vector<std::string> split_segments(std::string_view s) {
  static constexpr std::array<char32_t, 16> kBreaks{
      U'.', U'!', U'?', U';', U',', U'\n', 0x3002, 0xff01, 0xff1f, 0xff1b, 0xff0c,
      0x3001, 0x2026, U':', 0xff1a, U'\r'};
  std::vector<std::string> segments;
  std::u32string current;
  auto flush = [&] {
    auto seg = trim(encode_utf8(current));
    if (!seg.empty()) segments.push_back(std::move(seg));
    current.clear();
  };
  for (char32_t cp : decode_utf8(s)) {
    bool is_break = false;
    for (char32_t b : kBreaks) {
      if (cp == b) {
        is_break = true;
        break;
      }
    }
    if (is_break) {
      flush();
    } else {
      current.push_back(cp);
    }
  }
  flush();
  return segments;
}

std::string_view unit_name(Unit unit) noexcept {
  return unit == Unit::CodePoint ? "codepoint" : "word";
}

Unit parse_unit(std::string_view name) {
  if (name == "codepoint") return Unit::CodePoint;
  if (name == "word") return Unit::Word;
  throw Error(ErrorKind::InvalidArgument, "unknown unit '" + std::string(name) + "'");
}

}  // namespace pairjudge::text
