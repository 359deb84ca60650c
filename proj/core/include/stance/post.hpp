#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stance/config.hpp"
#include "stance/time_util.hpp"

namespace stance {

// One interaction record. Hashtags are stored lowercase without '#';
// retweeted_author_id, when present, is a different account than author_id.
struct Post {
  std::string post_id;
  std::string author_id;
  std::int64_t timestamp = 0;  // UTC seconds
  std::string text;
  std::optional<std::string> retweeted_author_id;
  std::vector<std::string> urls;
  std::vector<std::string> hashtags;
  std::vector<std::string> mentions;
  std::optional<std::string> location;
};

struct TopicConfig {
  std::string name;
  std::vector<std::string> keywords;  // '#'-prefixed → hashtag match, bare → whole-word text match
  CivilDate date_start;
  CivilDate date_end;
  bool us_filter = true;

  // Reads name/keywords/date_start/date_end (+ optional us_filter).
  static TopicConfig from_config(const Config& cfg);
};

// US-location matcher. `terms` are word sequences matched case-insensitively
// against the tokenized location; `abbreviations` match single tokens only
// when the raw token is fully uppercase, which keeps "Madrid" from matching
// MD and "in Paris" from matching IN.
struct Gazetteer {
  std::vector<std::string> terms;
  std::vector<std::string> abbreviations;

  bool matches(const std::string& location) const;

  static Gazetteer from_config(const Config& cfg);
};

}  // namespace stance
