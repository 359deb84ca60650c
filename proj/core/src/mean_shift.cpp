#include "stance/mean_shift.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stance/parallel.hpp"

namespace stance {

double estimate_bandwidth(const Eigen::MatrixX2d& points, double quantile) {
  const std::size_t n = static_cast<std::size_t>(points.rows());
  if (quantile <= 0 || quantile > 1) throw std::invalid_argument("estimate_bandwidth: quantile in (0,1]");
  if (n < 2) throw std::invalid_argument("estimate_bandwidth: need at least 2 points");

  const std::size_t k = std::min<std::size_t>(n - 1, static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(n))));
  double sum = 0;
  std::vector<double> dists(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t m = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      dists[m++] = (points.row(i) - points.row(j)).norm();
    }
    std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
    sum += dists[k - 1];
  }
  const double bandwidth = sum / static_cast<double>(n);
  if (bandwidth <= 0)
    throw std::invalid_argument("estimate_bandwidth: all points identical; pass an explicit bandwidth");
  return bandwidth;
}

MeanShiftResult mean_shift(const Eigen::MatrixX2d& points, double bandwidth,
                           const MeanShiftParams& params) {
  if (bandwidth <= 0) throw std::invalid_argument("mean_shift: bandwidth must be positive");
  const std::size_t n = static_cast<std::size_t>(points.rows());
  MeanShiftResult result;
  if (n == 0) return result;

  const double tol = params.convergence_factor * bandwidth;
  const double bw_sq = bandwidth * bandwidth;

  // Every point seeds one trajectory; trajectories are independent.
  Eigen::MatrixX2d converged(n, 2);
  parallel_for_blocks(n, params.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      Eigen::RowVector2d x = points.row(s);
      for (int it = 0; it < params.max_iterations; ++it) {
        Eigen::RowVector2d sum = Eigen::RowVector2d::Zero();
        std::size_t inside = 0;
        for (std::size_t j = 0; j < n; ++j) {
          if ((points.row(j) - x).squaredNorm() <= bw_sq) {
            sum += points.row(j);
            ++inside;
          }
        }
        if (inside == 0) break;
        const Eigen::RowVector2d next = sum / static_cast<double>(inside);
        const double shift = (next - x).norm();
        x = next;
        if (shift < tol) break;
      }
      converged.row(s) = x;
    }
  });

  // Merge modes closer than the bandwidth, preferring denser ones.
  std::vector<std::size_t> support(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t j = 0; j < n; ++j) {
      if ((points.row(j) - converged.row(s)).squaredNorm() <= bw_sq) ++support[s];
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (support[a] != support[b]) return support[a] > support[b];
    return a < b;
  });

  std::vector<Eigen::RowVector2d> modes;
  for (std::size_t idx : order) {
    bool merged = false;
    for (const auto& m : modes) {
      if ((m - converged.row(idx)).squaredNorm() <= bw_sq) {
        merged = true;
        break;
      }
    }
    if (!merged) modes.emplace_back(converged.row(idx));
  }

  result.modes.resize(static_cast<Eigen::Index>(modes.size()), 2);
  for (std::size_t m = 0; m < modes.size(); ++m) result.modes.row(m) = modes[m];
  result.sizes.assign(modes.size(), 0);
  result.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    int best = 0;
    double best_d = (points.row(i) - result.modes.row(0)).squaredNorm();
    for (std::size_t m = 1; m < modes.size(); ++m) {
      const double d = (points.row(i) - result.modes.row(m)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(m);
      }
    }
    result.labels[i] = best;
    ++result.sizes[best];
  }
  return result;
}

std::pair<int, int> top_two(const MeanShiftResult& result) {
  if (result.sizes.size() < 2)
    throw std::runtime_error("top_two: fewer than two clusters; topic is not polarized");
  int first = -1, second = -1;
  for (std::size_t i = 0; i < result.sizes.size(); ++i) {
    const int idx = static_cast<int>(i);
    if (first < 0 || result.sizes[i] > result.sizes[first]) {
      second = first;
      first = idx;
    } else if (second < 0 || result.sizes[i] > result.sizes[second]) {
      second = idx;
    }
  }
  return {first, second};
}

}  // namespace stance
