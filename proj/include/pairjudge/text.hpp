#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace pairjudge::text {

/// How a text is cut into units for lengths, n-grams and repetition checks.
enum class Unit { CodePoint, Word };

std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
std::string encode_utf8(char32_t cp);

bool is_cjk(char32_t cp) noexcept;
bool is_space(char32_t cp) noexcept;

/// CodePoint when CJK code points make up at least half of the non-space
/// code points, Word otherwise.
Unit detect_unit(std::string_view s);

/// Code points (whitespace dropped) or whitespace-delimited words.
std::vector<std::string> split_units(std::string_view s, Unit unit);

/// Length in units under the auto-detected unit.
std::size_t unit_length(std::string_view s);

std::size_t codepoint_length(std::string_view s);

/// Strips leading and trailing whitespace, including U+3000.
std::string trim(std::string_view s);

/// Trims, then peels matching quotation wrappers ("..", '..', “..”, 「..」 ...).
std::string strip_wrappers(std::string_view s);

/// Splits on clause and sentence punctuation and newlines; empty segments dropped.
std::vector<std::string> split_segments(std::string_view s);

std::string_view unit_name(Unit unit) noexcept;
Unit parse_unit(std::string_view name);

}  // namespace pairjudge::text
