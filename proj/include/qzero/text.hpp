#pragma once

// UTF-8 helpers shared by the analyzers, keyword extractors and tokenizers.
//
// Character classes are a table-free approximation of the Unicode categories:
// exact for ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic; code points
// in the general punctuation, symbol, CJK punctuation and emoji blocks are
// treated as separators, and everything else outside ASCII counts as a letter.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace qzero::text {

inline constexpr char32_t kReplacementChar = 0xFFFD;

/// Decodes the code point starting at `pos` and advances `pos` past it.
/// Malformed sequences decode to U+FFFD and consume one byte.
char32_t decode_next(std::string_view s, std::size_t& pos) noexcept;

void append_utf8(std::string& out, char32_t cp);

bool is_space(char32_t cp) noexcept;
bool is_number(char32_t cp) noexcept;
bool is_letter(char32_t cp) noexcept;
inline bool is_alnum(char32_t cp) noexcept { return is_letter(cp) || is_number(cp); }
bool is_upper(char32_t cp) noexcept;
char32_t to_lower(char32_t cp) noexcept;

std::string to_lower(std::string_view s);

std::string_view trim(std::string_view s) noexcept;

/// Maximal runs of non-whitespace code points.
std::vector<std::string_view> split_whitespace(std::string_view s);

/// Maximal runs of alphanumeric code points, case preserved.
std::vector<std::string_view> split_alnum(std::string_view s);

/// True when `s` holds at least one code point and none of them is alphanumeric.
bool is_punctuation_only(std::string_view s) noexcept;

/// Length of the longest prefix of `s` that does not end inside a multi-byte sequence.
std::size_t complete_utf8_prefix(std::string_view s) noexcept;

}  // namespace qzero::text
