#include "stance/text.hpp"

#include <cctype>

namespace stance {

namespace {

inline char lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = lower(c);
  return out;
}

bool is_all_upper(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c >= 'a' && c <= 'z') return false;
  }
  return true;
}

std::vector<std::string> tokenize_location(std::string_view s) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : s) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) {
        tokens.push_back(cur);
        cur.clear();
      }
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

bool contains_word(std::string_view text, std::string_view word) {
  if (word.empty()) return false;
  const size_t n = text.size(), m = word.size();
  for (size_t i = 0; i + m <= n; ++i) {
    bool match = true;
    for (size_t j = 0; j < m; ++j) {
      if (lower(text[i + j]) != lower(word[j])) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    const bool left_ok = (i == 0) || !word_char(text[i - 1]);
    const bool right_ok = (i + m == n) || !word_char(text[i + m]);
    if (left_ok && right_ok) return true;
  }
  return false;
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return true;
  const size_t n = haystack.size(), m = needle.size();
  if (m > n) return false;
  for (size_t i = 0; i + m <= n; ++i) {
    bool match = true;
    for (size_t j = 0; j < m; ++j) {
      if (lower(haystack[i + j]) != lower(needle[j])) {
        match = false;
        break;
      }
    }
    if (match) return true;
  }
  return false;
}

}  // namespace stance
