#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stance {

// Per-topic stance clusters. c0/c1 are the two retained cluster indices
// (c0 the largest); sign is set later by cross-topic valence alignment.
struct ClusterAssignment {
  std::string topic;
  std::map<std::string, int> labels;  // user -> cluster index
  int c0 = -1;
  int c1 = -1;
  int sign = +1;
};

// Mean distance to the ceil(quantile*n)-th nearest neighbor. Throws when all
// points coincide (callers should pass an explicit bandwidth instead).
double estimate_bandwidth(const Eigen::MatrixX2d& points, double quantile = 0.3);

struct MeanShiftParams {
  double convergence_factor = 1e-4;  // stop when a shift drops below factor*bandwidth
  int max_iterations = 300;
  unsigned threads = 0;
};

struct MeanShiftResult {
  std::vector<int> labels;          // one per point, 0-based mode index
  Eigen::MatrixX2d modes;           // one row per cluster
  std::vector<std::size_t> sizes;   // points per cluster
};

// Flat-kernel mode seeking: every point is a seed, seeds iterate to a local
// mean, modes closer than the bandwidth merge, and every point joins its
// nearest surviving mode.
MeanShiftResult mean_shift(const Eigen::MatrixX2d& points, double bandwidth,
                           const MeanShiftParams& params = {});

// The two most populous cluster indices, size-descending with smaller-index
// tie-break. Throws when fewer than two clusters exist (non-polarized topic).
std::pair<int, int> top_two(const MeanShiftResult& result);

}  // namespace stance
