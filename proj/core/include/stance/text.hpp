#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace stance {

// ASCII-only case folding; multibyte sequences pass through untouched.
std::string to_lower(std::string_view s);

bool is_all_upper(std::string_view s);

// Splits on commas and whitespace, dropping empty pieces.
std::vector<std::string> tokenize_location(std::string_view s);

// Whole-word search: `word` bounded by non-alphanumeric characters (or the
// string ends). Case-insensitive, ASCII.
bool contains_word(std::string_view text, std::string_view word);

// Case-insensitive substring search, ASCII.
bool contains_ci(std::string_view haystack, std::string_view needle);

}  // namespace stance
