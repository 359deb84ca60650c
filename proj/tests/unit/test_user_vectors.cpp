#include <doctest.h>

#include <random>

#include "stance/user_vectors.hpp"

using namespace stance;

namespace {

Post retweet(std::string id, std::string author, std::string target) {
  Post p;
  p.post_id = std::move(id);
  p.author_id = std::move(author);
  p.retweeted_author_id = std::move(target);
  p.timestamp = 0;
  return p;
}

Post plain(std::string id, std::string author) {
  Post p;
  p.post_id = std::move(id);
  p.author_id = std::move(author);
  p.timestamp = 0;
  return p;
}

UserVector vec(std::string id, std::map<std::string, std::int64_t> counts) {
  UserVector v;
  v.user_id = std::move(id);
  v.counts = std::move(counts);
  return v;
}

}  // namespace

TEST_CASE("build_vectors counts retweets per target") {
  std::vector<Post> posts;
  int id = 0;
  for (int i = 0; i < 3; ++i) posts.push_back(retweet(std::to_string(id++), "A", "B"));
  for (int i = 0; i < 5; ++i) posts.push_back(retweet(std::to_string(id++), "A", "C"));
  for (int i = 0; i < 8; ++i) posts.push_back(retweet(std::to_string(id++), "A", "E"));
  posts.push_back(plain(std::to_string(id++), "A"));

  const auto vectors = build_vectors(posts);
  REQUIRE(vectors.size() == 1);
  const auto& a = vectors.at("A");
  CHECK(a.counts == std::map<std::string, std::int64_t>{{"B", 3}, {"C", 5}, {"E", 8}});
  CHECK(a.total() == 16);
  CHECK(a.distinct_accounts() == 3);
}

TEST_CASE("build_vectors: no retweets -> empty map") {
  CHECK(build_vectors({plain("1", "A"), plain("2", "B")}).empty());
}

TEST_CASE("build_vectors: disjoint users get disjoint keys") {
  // 6-post fixture counted by hand
  const std::vector<Post> posts = {retweet("1", "A", "x"), retweet("2", "A", "x"),
                                   retweet("3", "A", "y"), retweet("4", "B", "z"),
                                   retweet("5", "B", "w"), retweet("6", "B", "z")};
  const auto vectors = build_vectors(posts);
  REQUIRE(vectors.size() == 2);
  CHECK(vectors.at("A").counts == std::map<std::string, std::int64_t>{{"x", 2}, {"y", 1}});
  CHECK(vectors.at("B").counts == std::map<std::string, std::int64_t>{{"w", 1}, {"z", 2}});
}

TEST_CASE("top_active ranks by post count with lexicographic ties") {
  std::vector<Post> posts;
  int id = 0;
  for (int i = 0; i < 5; ++i) posts.push_back(plain(std::to_string(id++), "u1"));
  for (int i = 0; i < 3; ++i) posts.push_back(plain(std::to_string(id++), "u2"));
  posts.push_back(plain(std::to_string(id++), "u3"));

  CHECK(top_active(posts, 2) == std::vector<std::string>{"u1", "u2"});
  CHECK(top_active(posts, 1000).size() == 3);  // clamp

  // tie: u1 and u0 both at 5 -> lexicographic
  for (int i = 0; i < 5; ++i) posts.push_back(plain(std::to_string(id++), "u0"));
  CHECK(top_active(posts, 1) == std::vector<std::string>{"u0"});
}

TEST_CASE("top_active can count retweets instead") {
  std::vector<Post> posts = {plain("1", "a"), plain("2", "a"), plain("3", "a"),
                             retweet("4", "b", "x"), retweet("5", "b", "x")};
  CHECK(top_active(posts, 1, ActivityMetric::kPosts) == std::vector<std::string>{"a"});
  CHECK(top_active(posts, 1, ActivityMetric::kRetweets) == std::vector<std::string>{"b"});
}

TEST_CASE("cosine basics") {
  const auto u = vec("u", {{"a", 1}, {"b", 2}});
  const auto v = vec("v", {{"a", 2}, {"b", 1}});
  CHECK(cosine(u, u) == doctest::Approx(1.0));
  CHECK(cosine(u, v) == doctest::Approx(0.8));  // 4 / (sqrt5 * sqrt5)
  CHECK(cosine(u, vec("w", {{"c", 7}})) == 0.0);
  CHECK(cosine(u, vec("e", {})) == 0.0);
}

TEST_CASE("cosine symmetry and scale invariance") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    UserVector u, v;
    for (int k = 0; k < 6; ++k) {
      if (rng() % 2) u.counts["a" + std::to_string(rng() % 8)] += 1 + rng() % 5;
      if (rng() % 2) v.counts["a" + std::to_string(rng() % 8)] += 1 + rng() % 5;
    }
    const double s = cosine(u, v);
    CHECK(cosine(v, u) == doctest::Approx(s).epsilon(1e-12));
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);

    UserVector scaled = u;
    for (auto& [_, c] : scaled.counts) c *= 3;
    CHECK(cosine(scaled, v) == doctest::Approx(s).epsilon(1e-9));
  }
}

TEST_CASE("similarity_matrix matches elementwise cosine") {
  UserVectorMap vectors;
  vectors["p"] = vec("p", {{"a", 1}, {"b", 2}});
  vectors["q"] = vec("q", {{"a", 2}, {"b", 1}});
  vectors["r"] = vec("r", {{"c", 4}});

  const auto m = similarity_matrix(vectors, {"p", "q", "r"});
  REQUIRE(m.user_ids.size() == 3);
  CHECK(m.values(0, 0) == doctest::Approx(1.0));
  CHECK(m.values(0, 1) == doctest::Approx(0.8));
  CHECK(m.values(0, 2) == doctest::Approx(0.0));
  CHECK(m.values(1, 2) == doctest::Approx(0.0));
  CHECK((m.values - m.values.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("similarity_matrix respects the dense cap") {
  UserVectorMap vectors;
  vectors["p"] = vec("p", {{"a", 1}});
  vectors["q"] = vec("q", {{"a", 1}});
  SimilarityOptions opts;
  opts.dense_cap = 1;
  CHECK_THROWS_AS(similarity_matrix(vectors, {"p", "q"}, opts), std::invalid_argument);
}

TEST_CASE("similarity_matrix parallel equals serial") {
  UserVectorMap vectors;
  std::mt19937_64 rng(11);
  std::vector<std::string> ids;
  for (int i = 0; i < 40; ++i) {
    UserVector v;
    v.user_id = "u" + std::to_string(i);
    for (int k = 0; k < 5; ++k) v.counts["a" + std::to_string(rng() % 20)] += 1;
    ids.push_back(v.user_id);
    vectors[v.user_id] = std::move(v);
  }
  SimilarityOptions serial{2000, 1}, parallel{2000, 4};
  const auto a = similarity_matrix(vectors, ids, serial);
  const auto b = similarity_matrix(vectors, ids, parallel);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
}
