#include <doctest.h>

#include "stance/config.hpp"

using namespace stance;

TEST_CASE("config parses scalars, arrays, and sections") {
  const char* text = R"(
# pipeline settings
seed = 42
name = "climate change"
ratio = 0.25
flag = true
date_start = 2019-02-25
keywords = ["#climate", "#gun", "midterm"]

[projection]
k = 15
min_dist = 0.1
)";
  const Config cfg = Config::parse_string(text);
  CHECK(cfg.get_int("seed") == 42);
  CHECK(cfg.get_string("name") == "climate change");
  CHECK(cfg.get_double("ratio") == doctest::Approx(0.25));
  CHECK(cfg.get_bool("flag"));
  CHECK(cfg.get_string("date_start") == "2019-02-25");
  CHECK(cfg.get_list("keywords") == std::vector<std::string>{"#climate", "#gun", "midterm"});
  CHECK(cfg.get_int("projection.k") == 15);
  CHECK(cfg.get_double("projection.min_dist") == doctest::Approx(0.1));
}

TEST_CASE("config defaults and missing keys") {
  const Config cfg = Config::parse_string("a = 1\n");
  CHECK(cfg.get_int("a", 7) == 1);
  CHECK(cfg.get_int("b", 7) == 7);
  CHECK_THROWS_AS(cfg.get_int("b"), ConfigError);
  CHECK_THROWS_AS(cfg.get_string("a"), ConfigError);  // wrong type
}

TEST_CASE("config rejects malformed lines") {
  CHECK_THROWS_AS(Config::parse_string("just a token\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse_string("[unclosed\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse_string("k = \"unterminated\n"), ConfigError);
}

TEST_CASE("comments and quoted hashes") {
  const Config cfg = Config::parse_string("k = \"a # b\" # trailing\n");
  CHECK(cfg.get_string("k") == "a # b");
}

TEST_CASE("canonical form is stable and order-independent") {
  const Config a = Config::parse_string("b = 2\na = 1\n");
  const Config b = Config::parse_string("a = 1\nb = 2\n");
  CHECK(a.canonical() == b.canonical());
  CHECK(a.canonical().find("a=i:1") != std::string::npos);
}
