#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stance/user_vectors.hpp"

namespace testutil {

// Mean silhouette coefficient over all points, Euclidean, 2 ground-truth
// groups or more.
inline double silhouette(const Eigen::MatrixX2d& coords, const std::vector<int>& labels) {
  const std::size_t n = static_cast<std::size_t>(coords.rows());
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[labels[i]].push_back(i);

  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double a = 0;
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [label, members] : groups) {
      double sum = 0;
      std::size_t count = 0;
      for (std::size_t j : members) {
        if (j == i) continue;
        sum += (coords.row(i) - coords.row(j)).norm();
        ++count;
      }
      if (count == 0) continue;
      const double mean = sum / static_cast<double>(count);
      if (label == labels[i])
        a = mean;
      else
        b = std::min(b, mean);
    }
    const double denom = std::max(a, b);
    if (denom > 0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

// Fraction of points whose ground truth matches their cluster's majority
// ground truth, over the given point subset.
inline double purity(const std::vector<int>& cluster_of, const std::vector<int>& truth) {
  std::map<int, std::map<int, std::size_t>> votes;
  for (std::size_t i = 0; i < cluster_of.size(); ++i) ++votes[cluster_of[i]][truth[i]];
  std::size_t agree = 0;
  for (const auto& [cluster, counts] : votes) {
    std::size_t best = 0;
    for (const auto& [_, c] : counts) best = std::max(best, c);
    agree += best;
  }
  return static_cast<double>(agree) / static_cast<double>(cluster_of.size());
}

// Two planted user groups with disjoint retweet vocabularies plus a tunable
// amount of shared-account noise; cross-group cosine stays near `overlap`.
inline stance::UserVectorMap planted_vectors(int per_group, int accounts_per_group,
                                             std::uint64_t seed, double overlap = 0.0) {
  stance::UserVectorMap vectors;
  std::mt19937_64 rng(seed);
  for (int g = 0; g < 2; ++g) {
    for (int i = 0; i < per_group; ++i) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "u%c%03d", g == 0 ? 'a' : 'b', i);
      stance::UserVector v;
      v.user_id = buf;
      const int n_accounts = 3 + static_cast<int>(rng() % 5);
      for (int k = 0; k < n_accounts; ++k) {
        const int acc = static_cast<int>(rng() % static_cast<std::uint64_t>(accounts_per_group));
        v.counts["acc" + std::to_string(g) + "_" + std::to_string(acc)] += 1 + static_cast<int>(rng() % 4);
      }
      if (overlap > 0) {
        std::uniform_real_distribution<double> coin(0, 1);
        if (coin(rng) < overlap) v.counts["shared_0"] += 1;
      }
      vectors[v.user_id] = std::move(v);
    }
  }
  return vectors;
}

}  // namespace testutil
