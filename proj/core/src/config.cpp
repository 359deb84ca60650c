#include "stance/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "stance/hash.hpp"

namespace stance {

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

namespace {

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(std::string_view line) {
  bool in_quote = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_quote = !in_quote;
    if (line[i] == '#' && !in_quote) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

std::string unescape(std::string_view s, const std::string& where) {
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out.push_back(s[i]);
      continue;
    }
    if (++i >= s.size()) throw ConfigError(where + ": dangling escape");
    switch (s[i]) {
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case '"': out.push_back('"'); break;
      case '\\': out.push_back('\\'); break;
      default: throw ConfigError(where + ": unknown escape \\" + std::string(1, s[i]));
    }
  }
  return out;
}

Config::Value parse_scalar(std::string_view raw, const std::string& where) {
  std::string t = trim(raw);
  if (t.empty()) throw ConfigError(where + ": empty value");
  if (t.front() == '"') {
    if (t.size() < 2 || t.back() != '"') throw ConfigError(where + ": unterminated string");
    return unescape(std::string_view(t).substr(1, t.size() - 2), where);
  }
  if (t == "true") return true;
  if (t == "false") return false;
  {
    std::int64_t iv = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), iv);
    if (ec == std::errc() && p == t.data() + t.size()) return iv;
  }
  {
    double dv = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), dv);
    if (ec == std::errc() && p == t.data() + t.size()) return dv;
  }
  // Bare token (dates and similar) kept verbatim.
  return t;
}

std::vector<std::string> parse_array(std::string_view raw, const std::string& where) {
  std::string t = trim(raw);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']')
    throw ConfigError(where + ": malformed array");
  std::string inner = t.substr(1, t.size() - 2);
  std::vector<std::string> items;
  std::string cur;
  bool in_quote = false;
  for (size_t i = 0; i < inner.size(); ++i) {
    const char c = inner[i];
    if (c == '"' && (i == 0 || inner[i - 1] != '\\')) in_quote = !in_quote;
    if (c == ',' && !in_quote) {
      std::string item = trim(cur);
      if (!item.empty()) {
        Config::Value v = parse_scalar(item, where);
        if (auto* s = std::get_if<std::string>(&v))
          items.push_back(*s);
        else
          items.push_back(trim(item));
      }
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  std::string item = trim(cur);
  if (!item.empty()) {
    Config::Value v = parse_scalar(item, where);
    if (auto* s = std::get_if<std::string>(&v))
      items.push_back(*s);
    else
      items.push_back(item);
  }
  return items;
}

std::string render(const Config::Value& v) {
  struct Visitor {
    std::string operator()(const std::string& s) const { return "s:" + s; }
    std::string operator()(std::int64_t i) const { return "i:" + std::to_string(i); }
    std::string operator()(double d) const {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "f:%.17g", d);
      return buf;
    }
    std::string operator()(bool b) const { return b ? "b:true" : "b:false"; }
    std::string operator()(const std::vector<std::string>& a) const {
      std::string out = "a:";
      for (const auto& s : a) {
        out += s;
        out.push_back('\x1f');
      }
      return out;
    }
  };
  return std::visit(Visitor{}, v);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

Config Config::parse_string(std::string_view text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::string section;
  size_t lineno = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view rawline = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++lineno;

    std::string line = trim(strip_comment(rawline));
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) throw ConfigError(where + ": malformed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      continue;
    }

    size_t eq = std::string::npos;
    {
      bool in_quote = false;
      for (size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_quote = !in_quote;
        if (line[i] == '=' && !in_quote) {
          eq = i;
          break;
        }
      }
    }
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (!section.empty()) key = section + "." + key;

    if (!value.empty() && value.front() == '[')
      cfg.values_[key] = parse_array(value, where);
    else
      cfg.values_[key] = parse_scalar(value, where);
  }
  return cfg;
}

const Config::Value& Config::require(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(origin_ + ": missing config key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key) const {
  const Value& v = require(key);
  if (auto* s = std::get_if<std::string>(&v)) return *s;
  throw ConfigError(origin_ + ": key '" + key + "' is not a string");
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

std::int64_t Config::get_int(const std::string& key) const {
  const Value& v = require(key);
  if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
  throw ConfigError(origin_ + ": key '" + key + "' is not an integer");
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

double Config::get_double(const std::string& key) const {
  const Value& v = require(key);
  if (auto* d = std::get_if<double>(&v)) return *d;
  if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw ConfigError(origin_ + ": key '" + key + "' is not a number");
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

bool Config::get_bool(const std::string& key) const {
  const Value& v = require(key);
  if (auto* b = std::get_if<bool>(&v)) return *b;
  throw ConfigError(origin_ + ": key '" + key + "' is not a boolean");
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  return has(key) ? get_bool(key) : fallback;
}

std::vector<std::string> Config::get_list(const std::string& key) const {
  const Value& v = require(key);
  if (auto* a = std::get_if<std::vector<std::string>>(&v)) return *a;
  throw ConfigError(origin_ + ": key '" + key + "' is not an array");
}

std::vector<std::string> Config::get_list(const std::string& key, std::vector<std::string> fallback) const {
  return has(key) ? get_list(key) : fallback;
}

std::vector<std::string> Config::keys(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [k, _] : values_) {
    if (prefix.empty() || k.rfind(prefix, 0) == 0) out.push_back(k);
  }
  return out;
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    out += k;
    out.push_back('=');
    out += render(v);
    out.push_back('\n');
  }
  return out;
}

}  // namespace stance
