#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stance/post.hpp"

namespace stance {

// Sparse retweeted-account count vector of one user. Accounts never
// retweeted are absent, all stored counts are >= 1.
struct UserVector {
  std::string user_id;
  std::map<std::string, std::int64_t> counts;

  std::int64_t total() const;
  std::size_t distinct_accounts() const { return counts.size(); }
};

using UserVectorMap = std::map<std::string, UserVector>;

enum class ActivityMetric { kPosts, kRetweets };

// counts[b] = number of posts by the user with retweeted_author_id = b.
UserVectorMap build_vectors(const std::vector<Post>& posts);

// The n most active users (posts by default, retweets optionally), ties
// broken by lexicographic user id. Returns all users when fewer than n.
std::vector<std::string> top_active(const std::vector<Post>& posts, std::size_t n,
                                    ActivityMetric metric = ActivityMetric::kPosts);

// dot(u,v) / (|u||v|) in [0,1]; 0 when either vector has zero norm.
double cosine(const UserVector& u, const UserVector& v);

struct SimilarityMatrix {
  std::vector<std::string> user_ids;
  Eigen::MatrixXd values;  // symmetric, entries in [0,1]
};

struct SimilarityOptions {
  std::size_t dense_cap = 2000;
  unsigned threads = 0;  // 0 = hardware concurrency
};

// Pairwise cosine over `subset`, in the given order. Every id must be a key
// of `vectors`. Throws when the subset exceeds the dense storage cap.
SimilarityMatrix similarity_matrix(const UserVectorMap& vectors,
                                   const std::vector<std::string>& subset,
                                   const SimilarityOptions& opts = {});

}  // namespace stance
