#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stance/post.hpp"

namespace stance {

struct ParseStats {
  std::size_t parsed = 0;
  std::size_t skipped = 0;
};

// Streams newline-delimited JSON records into Posts. Malformed records
// (bad JSON, schema violations, duplicate or empty ids, self-retweets,
// unparsable timestamps) are skipped and counted, never fatal. Lines
// beginning with '#' are comments and are ignored entirely.
ParseStats parse_posts(std::istream& in, const std::function<void(Post&&)>& sink);

std::pair<std::vector<Post>, ParseStats> parse_posts(std::istream& in);

// Keeps posts whose location matches the gazetteer; absent location drops.
std::vector<Post> filter_us_users(std::vector<Post> posts, const Gazetteer& gaz);

// Keeps posts inside the topic date range (inclusive) that contain at least
// one keyword: '#'-prefixed keywords match hashtags by substring, bare
// keywords match the text by whole word. Case-insensitive.
std::vector<Post> filter_topic(std::vector<Post> posts, const TopicConfig& topic);

bool post_matches_topic(const Post& post, const TopicConfig& topic);

// Lowercased host of an absolute URL, leading "www." stripped, path/query
// discarded. No network, no redirect resolution. nullopt on unparsable input.
std::optional<std::string> extract_domain(std::string_view url);

// Link shorteners excluded from influencer statistics (configurable upstream).
const std::vector<std::string>& default_shortener_denylist();

}  // namespace stance
