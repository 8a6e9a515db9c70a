#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace finreason::text {

std::string_view trim(std::string_view s);
bool is_blank(std::string_view s);
std::string to_upper_ascii(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);
std::size_t count_occurrences(std::string_view haystack, std::string_view needle);
std::vector<std::string_view> split_lines(std::string_view s);

struct Codepoint {
    char32_t value;
    std::size_t length;  // bytes consumed, always >= 1
};

/// Decodes the UTF-8 sequence at `pos`. Invalid or truncated sequences decode
/// to U+FFFD and consume a single byte.
Codepoint decode_utf8(std::string_view s, std::size_t pos);

/// Han ideographs, CJK punctuation, kana, hangul and fullwidth forms.
bool is_cjk(char32_t cp);

/// ASCII whitespace plus U+3000 IDEOGRAPHIC SPACE.
bool is_space(char32_t cp);

}  // namespace finreason::text
