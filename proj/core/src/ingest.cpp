#include "stance/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "stance/text.hpp"

namespace stance {

namespace {

using nlohmann::json;

std::string normalize_hashtag(std::string_view tag) {
  if (!tag.empty() && tag.front() == '#') tag.remove_prefix(1);
  return to_lower(tag);
}

std::string normalize_mention(std::string_view m) {
  if (!m.empty() && m.front() == '@') m.remove_prefix(1);
  return to_lower(m);
}

bool read_string_array(const json& j, const char* field, std::vector<std::string>& out,
                       std::string (*normalize)(std::string_view)) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_array()) return false;
  out.reserve(it->size());
  for (const auto& item : *it) {
    if (!item.is_string()) return false;
    std::string s = item.get<std::string>();
    out.push_back(normalize ? normalize(s) : std::move(s));
  }
  return true;
}

// Returns nullopt if the record violates the schema or any Post invariant.
std::optional<Post> post_from_json(const json& j) {
  if (!j.is_object()) return std::nullopt;

  Post p;
  auto id = j.find("id");
  if (id == j.end() || !id->is_string()) return std::nullopt;
  p.post_id = id->get<std::string>();
  if (p.post_id.empty()) return std::nullopt;

  auto user = j.find("user_id");
  if (user == j.end() || !user->is_string()) return std::nullopt;
  p.author_id = user->get<std::string>();
  if (p.author_id.empty()) return std::nullopt;

  auto ts = j.find("ts");
  if (ts == j.end() || !ts->is_string()) return std::nullopt;
  auto parsed = parse_iso8601(ts->get<std::string>());
  if (!parsed) return std::nullopt;
  p.timestamp = *parsed;

  auto text = j.find("text");
  if (text == j.end() || !text->is_string()) return std::nullopt;
  p.text = text->get<std::string>();

  auto rt = j.find("rt_user_id");
  if (rt == j.end()) return std::nullopt;
  if (rt->is_string()) {
    std::string rt_id = rt->get<std::string>();
    if (rt_id.empty() || rt_id == p.author_id) return std::nullopt;
    p.retweeted_author_id = std::move(rt_id);
  } else if (!rt->is_null()) {
    return std::nullopt;
  }

  if (!read_string_array(j, "urls", p.urls, nullptr)) return std::nullopt;
  if (!read_string_array(j, "hashtags", p.hashtags, normalize_hashtag)) return std::nullopt;
  if (!read_string_array(j, "mentions", p.mentions, normalize_mention)) return std::nullopt;

  auto loc = j.find("loc");
  if (loc == j.end()) return std::nullopt;
  if (loc->is_string())
    p.location = loc->get<std::string>();
  else if (!loc->is_null())
    return std::nullopt;

  return p;
}

}  // namespace

ParseStats parse_posts(std::istream& in, const std::function<void(Post&&)>& sink) {
  ParseStats stats;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') continue;  // header / comment line

    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      ++stats.skipped;
      continue;
    }
    auto post = post_from_json(j);
    if (!post || !seen_ids.insert(post->post_id).second) {
      ++stats.skipped;
      continue;
    }
    ++stats.parsed;
    sink(std::move(*post));
  }
  return stats;
}

std::pair<std::vector<Post>, ParseStats> parse_posts(std::istream& in) {
  std::vector<Post> posts;
  ParseStats stats = parse_posts(in, [&](Post&& p) { posts.push_back(std::move(p)); });
  return {std::move(posts), stats};
}

bool Gazetteer::matches(const std::string& location) const {
  const std::vector<std::string> tokens = tokenize_location(location);
  if (tokens.empty()) return false;

  std::vector<std::string> lowered(tokens.size());
  for (size_t i = 0; i < tokens.size(); ++i) lowered[i] = to_lower(tokens[i]);

  for (const auto& abbrev : abbreviations) {
    const std::string ab = to_lower(abbrev);
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (lowered[i] == ab && is_all_upper(tokens[i])) return true;
    }
  }

  for (const auto& term : terms) {
    const std::vector<std::string> words = tokenize_location(to_lower(term));
    if (words.empty() || words.size() > lowered.size()) continue;
    for (size_t i = 0; i + words.size() <= lowered.size(); ++i) {
      if (std::equal(words.begin(), words.end(), lowered.begin() + i)) return true;
    }
  }
  return false;
}

std::vector<Post> filter_us_users(std::vector<Post> posts, const Gazetteer& gaz) {
  std::erase_if(posts, [&](const Post& p) { return !p.location || !gaz.matches(*p.location); });
  return posts;
}

bool post_matches_topic(const Post& post, const TopicConfig& topic) {
  const CivilDate d = date_of(post.timestamp);
  if (d < topic.date_start || topic.date_end < d) return false;

  for (const auto& kw : topic.keywords) {
    if (!kw.empty() && kw.front() == '#') {
      const std::string needle = to_lower(std::string_view(kw).substr(1));
      if (needle.empty()) continue;
      for (const auto& tag : post.hashtags) {
        if (tag.find(needle) != std::string::npos) return true;
      }
    } else {
      if (contains_word(post.text, kw)) return true;
    }
  }
  return false;
}

std::vector<Post> filter_topic(std::vector<Post> posts, const TopicConfig& topic) {
  std::erase_if(posts, [&](const Post& p) { return !post_matches_topic(p, topic); });
  return posts;
}

std::optional<std::string> extract_domain(std::string_view url) {
  const size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos || scheme_end == 0) return std::nullopt;
  for (size_t i = 0; i < scheme_end; ++i) {
    const char c = url[i];
    const bool ok = std::isalpha(static_cast<unsigned char>(c)) ||
                    (i > 0 && (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.'));
    if (!ok) return std::nullopt;
  }

  std::string_view rest = url.substr(scheme_end + 3);
  const size_t auth_end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, auth_end);

  const size_t at = authority.rfind('@');
  if (at != std::string_view::npos) authority = authority.substr(at + 1);

  const size_t colon = authority.rfind(':');
  if (colon != std::string_view::npos &&
      authority.find_first_not_of("0123456789", colon + 1) == std::string_view::npos) {
    authority = authority.substr(0, colon);
  }

  if (authority.empty()) return std::nullopt;
  std::string host = to_lower(authority);
  for (char c : host) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '_';
    if (!ok) return std::nullopt;
  }
  if (host.rfind("www.", 0) == 0 && host.size() > 4) host = host.substr(4);
  if (host.empty() || host.front() == '.' || host.back() == '.') return std::nullopt;
  return host;
}

const std::vector<std::string>& default_shortener_denylist() {
  static const std::vector<std::string> list = {
      "t.co",     "bit.ly",   "ow.ly",     "tinyurl.com", "goo.gl",
      "buff.ly",  "dlvr.it",  "ift.tt",    "is.gd",       "trib.al",
      "youtu.be", "fb.me",    "amzn.to",   "j.mp",        "shar.es",
  };
  return list;
}

TopicConfig TopicConfig::from_config(const Config& cfg) {
  TopicConfig t;
  t.name = cfg.get_string("name");
  t.keywords = cfg.get_list("keywords");
  if (t.name.empty()) throw ConfigError("topic name must be non-empty");
  if (t.keywords.empty()) throw ConfigError("topic '" + t.name + "': keywords must be non-empty");
  auto start = parse_date(cfg.get_string("date_start"));
  auto end = parse_date(cfg.get_string("date_end"));
  if (!start || !end) throw ConfigError("topic '" + t.name + "': dates must be YYYY-MM-DD");
  if (*end < *start) throw ConfigError("topic '" + t.name + "': date_start must be <= date_end");
  t.date_start = *start;
  t.date_end = *end;
  t.us_filter = cfg.get_bool("us_filter", true);
  return t;
}

Gazetteer Gazetteer::from_config(const Config& cfg) {
  Gazetteer g;
  g.terms = cfg.get_list("terms", {});
  g.abbreviations = cfg.get_list("abbreviations", {});
  if (g.terms.empty() && g.abbreviations.empty())
    throw ConfigError("gazetteer: terms/abbreviations must not both be empty");
  return g;
}

}  // namespace stance
