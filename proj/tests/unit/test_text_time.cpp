#include <doctest.h>

#include "stance/text.hpp"
#include "stance/time_util.hpp"

using namespace stance;

TEST_CASE("whole-word matching") {
  CHECK(contains_word("Midterm elections loom", "midterm"));
  CHECK_FALSE(contains_word("the midtermish season", "midterm"));
  CHECK(contains_word("vote! midterm, now", "midterm"));
  CHECK(contains_word("midterm", "midterm"));
  CHECK_FALSE(contains_word("", "midterm"));
  CHECK_FALSE(contains_word("abc", ""));
}

TEST_CASE("location tokenization splits on commas and spaces") {
  auto tokens = tokenize_location("Baltimore, MD");
  REQUIRE(tokens.size() == 2);
  CHECK(tokens[0] == "Baltimore");
  CHECK(tokens[1] == "MD");
  CHECK(tokenize_location("  ,, ").empty());
}

TEST_CASE("is_all_upper") {
  CHECK(is_all_upper("MD"));
  CHECK_FALSE(is_all_upper("Md"));
  CHECK_FALSE(is_all_upper(""));
  CHECK(is_all_upper("NY2"));
}

TEST_CASE("iso8601 parsing") {
  CHECK(parse_iso8601("1970-01-01T00:00:00Z") == 0);
  CHECK(parse_iso8601("1970-01-02T00:00:00Z") == 86400);
  CHECK(parse_iso8601("2019-03-01T12:30:15Z") == 1551443415);
  CHECK(parse_iso8601("2019-03-01T12:30:15.250Z") == 1551443415);
  CHECK(parse_iso8601("2019-03-01T13:30:15+01:00") == 1551443415);
  CHECK(parse_iso8601("2019-03-01 12:30:15") == 1551443415);
  CHECK_FALSE(parse_iso8601("2019-03-01").has_value());
  CHECK_FALSE(parse_iso8601("not a time").has_value());
  CHECK_FALSE(parse_iso8601("2019-02-30T00:00:00Z").has_value());
}

TEST_CASE("iso8601 round trip") {
  const std::int64_t ts = 1551443415;
  CHECK(parse_iso8601(format_iso8601(ts)) == ts);
  CHECK(format_iso8601(0) == "1970-01-01T00:00:00Z");
}

TEST_CASE("civil date conversions agree") {
  for (std::int64_t day : {-719468L, -1L, 0L, 1L, 18000L, 20000L}) {
    CHECK(days_from_civil(civil_from_days(day)) == day);
  }
  CHECK(date_of(1551443415) == CivilDate{2019, 3, 1});
}

TEST_CASE("date parsing validates") {
  CHECK(parse_date("2019-02-28") == CivilDate{2019, 2, 28});
  CHECK(parse_date("2020-02-29") == CivilDate{2020, 2, 29});
  CHECK_FALSE(parse_date("2019-02-29").has_value());
  CHECK_FALSE(parse_date("2019-13-01").has_value());
  CHECK_FALSE(parse_date("2019-1-1").has_value());
}
