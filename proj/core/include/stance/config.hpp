#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace stance {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Minimal TOML-style config reader: [section] headers, `key = value` pairs,
// '#' comments. Values: quoted strings, integers, floats, booleans, bare
// tokens (dates), and flat arrays. Nested tables and multi-line values are
// not supported.
class Config {
 public:
  using Value = std::variant<std::string, std::int64_t, double, bool, std::vector<std::string>>;

  static Config parse_file(const std::string& path);
  static Config parse_string(std::string_view text, const std::string& origin = "<string>");

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key, std::vector<std::string> fallback) const;

  // Keys in sorted order, optionally restricted to a "section." prefix.
  std::vector<std::string> keys(const std::string& prefix = "") const;

  // Stable one-line-per-key rendering; input for config hashing.
  std::string canonical() const;

  void set(const std::string& key, Value v) { values_[key] = std::move(v); }

 private:
  const Value& require(const std::string& key) const;

  std::map<std::string, Value> values_;
  std::string origin_;
};

}  // namespace stance
