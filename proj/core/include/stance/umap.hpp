#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stance/user_vectors.hpp"

namespace stance {

struct Neighbor {
  std::uint32_t index;
  double distance;
};

// Exact k-nearest-neighbor graph under cosine distance (1 - similarity).
// neighbors[i] holds exactly k entries sorted by (distance, index), self
// excluded.
struct KnnGraph {
  std::vector<std::vector<Neighbor>> neighbors;

  std::size_t size() const { return neighbors.size(); }
};

KnnGraph knn_graph(const UserVectorMap& vectors, const std::vector<std::string>& subset, int k,
                   unsigned threads = 0);

// Same construction from a precomputed similarity matrix.
KnnGraph knn_graph(const SimilarityMatrix& sim, int k);

struct FuzzyEdge {
  std::uint32_t a;
  std::uint32_t b;  // a < b
  double weight;    // in (0,1]
};

// Undirected fuzzy graph over the same node set as the k-NN graph.
struct FuzzyGraph {
  std::size_t n = 0;
  std::vector<FuzzyEdge> edges;  // sorted by (a, b)
};

// Smoothed exponential memberships: per-point bandwidth calibrated so the
// effective neighbor count is log2(k) (each point's nearest neighbor gets
// weight 1), then symmetrized with a + b - a*b.
FuzzyGraph fuzzy_weights(const KnnGraph& g);

// Output curve 1/(1 + a*d^(2b)) fitted by least squares against the target
// (1 for d < min_dist, exp(-(d - min_dist)/spread) beyond).
struct CurveParams {
  double a = 0;
  double b = 0;
};

CurveParams fit_output_curve(double min_dist, double spread = 1.0);

struct UmapParams {
  int k = 15;
  double min_dist = 0.1;
  double spread = 1.0;
  int epochs = 200;
  double learning_rate = 1.0;
  double negative_sample_rate = 5.0;
  double repulsion_strength = 1.0;
  std::uint64_t seed = 1;
  bool spectral_init = true;  // false: seeded random init
  // Hogwild-style parallel layout is only allowed when determinism is off;
  // deterministic mode runs the optimizer single-threaded.
  bool deterministic = true;
  unsigned threads = 1;
};

using EpochCallback = std::function<void(int epoch, const Eigen::MatrixX2d& coords)>;

// Stochastic attraction/repulsion layout with negative sampling. Returns
// finite n×2 coordinates; bit-identical for a fixed seed in deterministic
// mode. The callback, when set, fires after every epoch.
Eigen::MatrixX2d optimize_layout(const FuzzyGraph& graph, const UmapParams& params,
                                 const EpochCallback& on_epoch = nullptr);

struct Embedding2D {
  std::vector<std::string> user_ids;
  Eigen::MatrixX2d coords;
};

// knn_graph -> fuzzy_weights -> optimize_layout over the given user subset.
Embedding2D project_users(const UserVectorMap& vectors, const std::vector<std::string>& subset,
                          const UmapParams& params);

}  // namespace stance
