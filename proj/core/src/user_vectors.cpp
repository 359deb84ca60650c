#include "stance/user_vectors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "stance/parallel.hpp"

namespace stance {

std::int64_t UserVector::total() const {
  std::int64_t sum = 0;
  for (const auto& [_, c] : counts) sum += c;
  return sum;
}

UserVectorMap build_vectors(const std::vector<Post>& posts) {
  UserVectorMap vectors;
  for (const Post& p : posts) {
    if (!p.retweeted_author_id) continue;
    UserVector& v = vectors[p.author_id];
    if (v.user_id.empty()) v.user_id = p.author_id;
    ++v.counts[*p.retweeted_author_id];
  }
  return vectors;
}

std::vector<std::string> top_active(const std::vector<Post>& posts, std::size_t n,
                                    ActivityMetric metric) {
  std::unordered_map<std::string, std::int64_t> activity;
  for (const Post& p : posts) {
    if (metric == ActivityMetric::kRetweets && !p.retweeted_author_id) continue;
    ++activity[p.author_id];
  }
  std::vector<std::pair<std::string, std::int64_t>> ranked(activity.begin(), activity.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > n) ranked.resize(n);
  std::vector<std::string> ids;
  ids.reserve(ranked.size());
  for (auto& [id, _] : ranked) ids.push_back(std::move(id));
  return ids;
}

double cosine(const UserVector& u, const UserVector& v) {
  double dot = 0;
  auto it = u.counts.begin();
  auto jt = v.counts.begin();
  while (it != u.counts.end() && jt != v.counts.end()) {
    if (it->first < jt->first) {
      ++it;
    } else if (jt->first < it->first) {
      ++jt;
    } else {
      dot += static_cast<double>(it->second) * static_cast<double>(jt->second);
      ++it;
      ++jt;
    }
  }
  if (dot == 0) return 0.0;

  double nu = 0, nv = 0;
  for (const auto& [_, c] : u.counts) nu += static_cast<double>(c) * c;
  for (const auto& [_, c] : v.counts) nv += static_cast<double>(c) * c;
  if (nu == 0 || nv == 0) return 0.0;
  const double sim = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(sim, 0.0, 1.0);
}

SimilarityMatrix similarity_matrix(const UserVectorMap& vectors,
                                   const std::vector<std::string>& subset,
                                   const SimilarityOptions& opts) {
  const std::size_t n = subset.size();
  if (n > opts.dense_cap) {
    throw std::invalid_argument("similarity_matrix: subset of " + std::to_string(n) +
                                " users exceeds dense cap " + std::to_string(opts.dense_cap));
  }
  std::vector<const UserVector*> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = vectors.find(subset[i]);
    if (it == vectors.end())
      throw std::invalid_argument("similarity_matrix: unknown user '" + subset[i] + "'");
    rows[i] = &it->second;
  }

  SimilarityMatrix m;
  m.user_ids = subset;
  m.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));

  parallel_for_blocks(n, opts.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      m.values(i, i) = rows[i]->counts.empty() ? 0.0 : 1.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double s = cosine(*rows[i], *rows[j]);
        m.values(i, j) = s;
        m.values(j, i) = s;
      }
    }
  });
  return m;
}

}  // namespace stance
