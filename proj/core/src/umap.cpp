#include "stance/umap.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <stdexcept>

#include "stance/parallel.hpp"
#include "stance/rng.hpp"

namespace stance {

namespace {

constexpr double kSmoothTolerance = 1e-5;
constexpr int kSmoothIterations = 64;
constexpr double kMinBandwidthScale = 1e-3;

std::vector<Neighbor> nearest_k(const std::vector<std::pair<double, std::uint32_t>>& dists, int k) {
  std::vector<std::pair<double, std::uint32_t>> sorted(dists);
  std::partial_sort(sorted.begin(), sorted.begin() + k, sorted.end());
  std::vector<Neighbor> out;
  out.reserve(k);
  for (int j = 0; j < k; ++j) out.push_back({sorted[j].second, sorted[j].first});
  return out;
}

void check_knn_pre(std::size_t n, int k) {
  if (k < 2) throw std::invalid_argument("knn_graph: k must be >= 2");
  if (static_cast<std::size_t>(k) >= n) {
    throw std::invalid_argument("knn_graph: need more points than neighbors (n=" + std::to_string(n) +
                                ", k=" + std::to_string(k) + "); lower k");
  }
}

// Per-point bandwidth so that sum_j exp(-(d_j - rho)/sigma) hits log2(k).
double smooth_bandwidth(const std::vector<Neighbor>& nbrs, double rho) {
  const double target = std::log2(static_cast<double>(nbrs.size()));
  double lo = 0.0, hi = std::numeric_limits<double>::infinity(), mid = 1.0;
  for (int it = 0; it < kSmoothIterations; ++it) {
    double sum = 0.0;
    for (const Neighbor& nb : nbrs) {
      const double d = nb.distance - rho;
      sum += d > 0 ? std::exp(-d / mid) : 1.0;
    }
    if (std::abs(sum - target) < kSmoothTolerance) break;
    if (sum > target) {
      hi = mid;
      mid = 0.5 * (lo + hi);
    } else {
      lo = mid;
      mid = std::isinf(hi) ? mid * 2 : 0.5 * (lo + hi);
    }
  }
  return mid;
}

struct ComponentSplit {
  std::vector<int> component;  // node -> component id (by smallest member)
  int count = 0;
};

ComponentSplit connected_components(std::size_t n, const std::vector<FuzzyEdge>& edges) {
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (const FuzzyEdge& e : edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  ComponentSplit split;
  split.component.assign(n, -1);
  for (std::uint32_t start = 0; start < n; ++start) {
    if (split.component[start] >= 0) continue;
    const int id = split.count++;
    std::queue<std::uint32_t> q;
    q.push(start);
    split.component[start] = id;
    while (!q.empty()) {
      const std::uint32_t u = q.front();
      q.pop();
      for (std::uint32_t v : adj[u]) {
        if (split.component[v] < 0) {
          split.component[v] = id;
          q.push(v);
        }
      }
    }
  }
  return split;
}

// Bottom eigenvectors of the normalized Laplacian via subspace iteration on
// 2I - L (the spectrum is in [0,2], so the smallest eigenvalues of L map to
// the largest of the shifted operator). Returns false when the iteration
// fails to converge; the caller then falls back to seeded random init.
bool spectral_coords(const std::vector<std::uint32_t>& nodes, const std::vector<FuzzyEdge>& edges,
                     std::uint64_t seed, Eigen::MatrixX2d& out) {
  const std::size_t n = nodes.size();
  std::vector<std::uint32_t> local(edges.size() * 2);
  std::map<std::uint32_t, std::uint32_t> index;
  for (std::size_t i = 0; i < n; ++i) index[nodes[i]] = static_cast<std::uint32_t>(i);

  std::vector<double> degree(n, 0.0);
  struct LocalEdge {
    std::uint32_t a, b;
    double w;
  };
  std::vector<LocalEdge> local_edges;
  local_edges.reserve(edges.size());
  for (const FuzzyEdge& e : edges) {
    const std::uint32_t a = index.at(e.a), b = index.at(e.b);
    local_edges.push_back({a, b, e.weight});
    degree[a] += e.weight;
    degree[b] += e.weight;
  }
  for (double d : degree) {
    if (d <= 0) return false;  // isolated node inside a "component"
  }
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(degree[i]);

  // y = (2I - L) x = x + D^-1/2 A D^-1/2 x
  auto apply = [&](const Eigen::MatrixXd& x) {
    Eigen::MatrixXd y = x;
    for (const LocalEdge& e : local_edges) {
      const double w = e.w * inv_sqrt[e.a] * inv_sqrt[e.b];
      y.row(e.a) += w * x.row(e.b);
      y.row(e.b) += w * x.row(e.a);
    }
    return y;
  };

  const int nev = 3;  // trivial vector + 2 embedding dimensions
  std::mt19937_64 rng(derive_seed(seed, 0x1a70'0001ULL));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd basis(n, nev);
  for (std::size_t i = 0; i < n; ++i) {
    basis(i, 0) = 1.0 / inv_sqrt[i];  // exact trivial eigenvector D^1/2 * 1
    for (int j = 1; j < nev; ++j) basis(i, j) = gauss(rng);
  }

  auto orthonormalize = [&](Eigen::MatrixXd& m) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    m = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), nev);
  };
  orthonormalize(basis);

  const int max_iters = 300;
  Eigen::Vector3d prev_theta = Eigen::Vector3d::Zero();
  bool converged = false;
  for (int it = 0; it < max_iters; ++it) {
    Eigen::MatrixXd next = apply(basis);
    orthonormalize(next);
    basis = next;
    Eigen::MatrixXd image = apply(basis);
    Eigen::Vector3d theta;
    for (int j = 0; j < nev; ++j) theta(j) = basis.col(j).dot(image.col(j));
    if (it > 0 && (theta - prev_theta).cwiseAbs().maxCoeff() < 1e-9) {
      converged = true;
      break;
    }
    prev_theta = theta;
  }
  if (!converged) return false;

  // Rank by Rayleigh quotient, discard the trivial (largest) direction.
  Eigen::MatrixXd image = apply(basis);
  std::array<std::pair<double, int>, 3> ranked;
  for (int j = 0; j < nev; ++j) ranked[j] = {basis.col(j).dot(image.col(j)), j};
  std::sort(ranked.begin(), ranked.end(), [](auto& x, auto& y) { return x.first > y.first; });

  out.resize(static_cast<Eigen::Index>(n), 2);
  out.col(0) = basis.col(ranked[1].second);
  out.col(1) = basis.col(ranked[2].second);
  return out.allFinite();
}

Eigen::MatrixX2d initialize_layout(const FuzzyGraph& graph, const UmapParams& params) {
  const std::size_t n = graph.n;
  Eigen::MatrixX2d coords(n, 2);

  std::mt19937_64 rng(derive_seed(params.seed, 0x1a70'0002ULL));
  std::uniform_real_distribution<double> uniform(-10.0, 10.0);
  auto random_fill = [&](auto&& rows) {
    for (auto i : rows) {
      coords(i, 0) = uniform(rng);
      coords(i, 1) = uniform(rng);
    }
  };

  if (!params.spectral_init) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    random_fill(all);
    return coords;
  }

  const ComponentSplit split = connected_components(n, graph.edges);
  std::vector<std::vector<std::uint32_t>> members(split.count);
  for (std::size_t i = 0; i < n; ++i) members[split.component[i]].push_back(static_cast<std::uint32_t>(i));
  std::vector<std::vector<FuzzyEdge>> comp_edges(split.count);
  for (const FuzzyEdge& e : graph.edges) comp_edges[split.component[e.a]].push_back(e);

  // Components are laid out independently, then spread on a coarse grid so
  // that disconnected pieces do not start on top of each other.
  const int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(split.count))));
  const double spacing = 30.0;
  std::normal_distribution<double> jitter(0.0, 1e-4);

  for (int c = 0; c < split.count; ++c) {
    const auto& nodes = members[c];
    const double cx = (split.count > 1) ? spacing * (c % grid) : 0.0;
    const double cy = (split.count > 1) ? spacing * (c / grid) : 0.0;

    Eigen::MatrixX2d sub;
    bool ok = false;
    if (nodes.size() >= 3 && !comp_edges[c].empty()) {
      ok = spectral_coords(nodes, comp_edges[c], params.seed + static_cast<std::uint64_t>(c), sub);
    }
    if (ok) {
      const double max_abs = sub.cwiseAbs().maxCoeff();
      const double expansion = max_abs > 0 ? 10.0 / max_abs : 1.0;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        coords(nodes[i], 0) = sub(i, 0) * expansion + jitter(rng) + cx;
        coords(nodes[i], 1) = sub(i, 1) * expansion + jitter(rng) + cy;
      }
    } else {
      for (std::uint32_t node : nodes) {
        coords(node, 0) = uniform(rng) + cx;
        coords(node, 1) = uniform(rng) + cy;
      }
    }
  }
  return coords;
}

inline double clip4(double v) { return std::clamp(v, -4.0, 4.0); }

struct EdgeSchedule {
  std::vector<std::uint32_t> head;
  std::vector<std::uint32_t> tail;
  std::vector<double> epochs_per_sample;
};

EdgeSchedule build_schedule(const FuzzyGraph& graph) {
  EdgeSchedule s;
  double max_w = 0;
  for (const FuzzyEdge& e : graph.edges) max_w = std::max(max_w, e.weight);
  s.head.reserve(graph.edges.size() * 2);
  for (const FuzzyEdge& e : graph.edges) {
    // both directions: attraction is applied from each endpoint's schedule
    s.head.push_back(e.a);
    s.tail.push_back(e.b);
    s.epochs_per_sample.push_back(max_w / e.weight);
    s.head.push_back(e.b);
    s.tail.push_back(e.a);
    s.epochs_per_sample.push_back(max_w / e.weight);
  }
  return s;
}

void run_epochs(Eigen::MatrixX2d& coords, const EdgeSchedule& schedule, std::size_t n,
                const UmapParams& params, double a, double b, std::size_t edge_begin,
                std::size_t edge_end, std::vector<double>& next_sample,
                std::vector<double>& next_negative, std::mt19937_64& rng, int epoch) {
  const double alpha = params.learning_rate * (1.0 - static_cast<double>(epoch) / params.epochs);
  const double gamma = params.repulsion_strength;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  for (std::size_t e = edge_begin; e < edge_end; ++e) {
    if (next_sample[e] > epoch) continue;
    const std::uint32_t i = schedule.head[e];
    const std::uint32_t j = schedule.tail[e];

    double dx = coords(i, 0) - coords(j, 0);
    double dy = coords(i, 1) - coords(j, 1);
    double dist_sq = dx * dx + dy * dy;
    if (dist_sq > 0) {
      const double pd = std::pow(dist_sq, b);
      const double grad_coeff = (-2.0 * a * b * pd / dist_sq) / (a * pd + 1.0);
      const double gx = clip4(grad_coeff * dx);
      const double gy = clip4(grad_coeff * dy);
      coords(i, 0) += alpha * gx;
      coords(i, 1) += alpha * gy;
      coords(j, 0) -= alpha * gx;
      coords(j, 1) -= alpha * gy;
    }
    next_sample[e] += schedule.epochs_per_sample[e];

    const double eps_neg = schedule.epochs_per_sample[e] / params.negative_sample_rate;
    const int n_neg = static_cast<int>((epoch - next_negative[e]) / eps_neg);
    for (int p = 0; p < n_neg; ++p) {
      const std::size_t k = pick(rng);
      if (k == i) continue;
      dx = coords(i, 0) - coords(k, 0);
      dy = coords(i, 1) - coords(k, 1);
      dist_sq = dx * dx + dy * dy;
      double gx, gy;
      if (dist_sq > 0) {
        const double pd = std::pow(dist_sq, b);
        const double grad_coeff = (2.0 * gamma * b) / ((0.001 + dist_sq) * (a * pd + 1.0));
        gx = clip4(grad_coeff * dx);
        gy = clip4(grad_coeff * dy);
      } else {
        gx = 4.0;
        gy = 4.0;
      }
      coords(i, 0) += alpha * gx;
      coords(i, 1) += alpha * gy;
    }
    next_negative[e] += n_neg * eps_neg;
  }
}

}  // namespace

KnnGraph knn_graph(const UserVectorMap& vectors, const std::vector<std::string>& subset, int k,
                   unsigned threads) {
  const std::size_t n = subset.size();
  check_knn_pre(n, k);
  std::vector<const UserVector*> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = vectors.find(subset[i]);
    if (it == vectors.end()) throw std::invalid_argument("knn_graph: unknown user '" + subset[i] + "'");
    rows[i] = &it->second;
  }

  KnnGraph g;
  g.neighbors.resize(n);
  parallel_for_blocks(n, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<std::pair<double, std::uint32_t>> dists;
    for (std::size_t i = begin; i < end; ++i) {
      dists.clear();
      dists.reserve(n - 1);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        dists.emplace_back(1.0 - cosine(*rows[i], *rows[j]), static_cast<std::uint32_t>(j));
      }
      g.neighbors[i] = nearest_k(dists, k);
    }
  });
  return g;
}

KnnGraph knn_graph(const SimilarityMatrix& sim, int k) {
  const std::size_t n = sim.user_ids.size();
  check_knn_pre(n, k);
  KnnGraph g;
  g.neighbors.resize(n);
  std::vector<std::pair<double, std::uint32_t>> dists;
  for (std::size_t i = 0; i < n; ++i) {
    dists.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      dists.emplace_back(1.0 - sim.values(i, j), static_cast<std::uint32_t>(j));
    }
    g.neighbors[i] = nearest_k(dists, k);
  }
  return g;
}

FuzzyGraph fuzzy_weights(const KnnGraph& g) {
  const std::size_t n = g.size();
  FuzzyGraph out;
  out.n = n;
  if (n == 0) return out;

  double global_mean_dist = 0;
  std::size_t dist_count = 0;
  for (const auto& nbrs : g.neighbors) {
    for (const Neighbor& nb : nbrs) {
      global_mean_dist += nb.distance;
      ++dist_count;
    }
  }
  if (dist_count) global_mean_dist /= static_cast<double>(dist_count);

  // directed memberships
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> directed;
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto& nbrs = g.neighbors[i];
    if (nbrs.empty()) continue;
    const double rho = nbrs.front().distance;
    double sigma = smooth_bandwidth(nbrs, rho);
    double local_mean = 0;
    for (const Neighbor& nb : nbrs) local_mean += nb.distance;
    local_mean /= static_cast<double>(nbrs.size());
    sigma = std::max(sigma, kMinBandwidthScale * (rho > 0 ? local_mean : global_mean_dist));

    for (const Neighbor& nb : nbrs) {
      const double d = nb.distance - rho;
      const double w = d > 0 && sigma > 0 ? std::exp(-d / sigma) : 1.0;
      if (w > 0) directed[{i, nb.index}] = w;
    }
  }

  // a + b - a*b over unordered pairs
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> sym;
  for (const auto& [key, w] : directed) {
    auto [i, j] = key;
    const auto canon = std::minmax(i, j);
    auto rev = directed.find({j, i});
    const double w_rev = rev == directed.end() ? 0.0 : rev->second;
    const double s = w + w_rev - w * w_rev;
    sym[{canon.first, canon.second}] = s;
  }
  out.edges.reserve(sym.size());
  for (const auto& [key, w] : sym) {
    if (w > 0) out.edges.push_back({key.first, key.second, std::min(w, 1.0)});
  }
  return out;
}

CurveParams fit_output_curve(double min_dist, double spread) {
  // Levenberg-Marquardt on (a, b), matching the reference fit over 300
  // samples of the target curve on [0, 3*spread].
  const int samples = 300;
  std::vector<double> xs(samples), ys(samples);
  for (int i = 0; i < samples; ++i) {
    const double x = 3.0 * spread * i / (samples - 1);
    xs[i] = x;
    ys[i] = x < min_dist ? 1.0 : std::exp(-(x - min_dist) / spread);
  }

  double a = 1.0, b = 1.0, lambda = 1e-3;
  auto residual_norm = [&](double pa, double pb) {
    double sum = 0;
    for (int i = 0; i < samples; ++i) {
      const double f = 1.0 / (1.0 + pa * std::pow(xs[i], 2 * pb));
      sum += (f - ys[i]) * (f - ys[i]);
    }
    return sum;
  };

  double best = residual_norm(a, b);
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
    Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
    for (int i = 0; i < samples; ++i) {
      const double x = xs[i];
      const double xp = x > 0 ? std::pow(x, 2 * b) : 0.0;
      const double denom = 1.0 + a * xp;
      const double f = 1.0 / denom;
      const double r = f - ys[i];
      const double df_da = -xp / (denom * denom);
      const double df_db = x > 0 ? -2.0 * a * xp * std::log(x) / (denom * denom) : 0.0;
      jtj(0, 0) += df_da * df_da;
      jtj(0, 1) += df_da * df_db;
      jtj(1, 0) += df_db * df_da;
      jtj(1, 1) += df_db * df_db;
      jtr(0) += df_da * r;
      jtr(1) += df_db * r;
    }
    Eigen::Matrix2d damped = jtj;
    damped(0, 0) += lambda * jtj(0, 0);
    damped(1, 1) += lambda * jtj(1, 1);
    const Eigen::Vector2d delta = damped.ldlt().solve(-jtr);
    const double na = a + delta(0), nb = b + delta(1);
    if (!std::isfinite(na) || !std::isfinite(nb) || na <= 0 || nb <= 0) {
      lambda *= 10;
      continue;
    }
    const double cand = residual_norm(na, nb);
    if (cand < best) {
      if (best - cand < 1e-14) {
        a = na;
        b = nb;
        break;
      }
      a = na;
      b = nb;
      best = cand;
      lambda = std::max(lambda * 0.3, 1e-12);
    } else {
      lambda *= 10;
      if (lambda > 1e12) break;
    }
  }
  return {a, b};
}

Eigen::MatrixX2d optimize_layout(const FuzzyGraph& graph, const UmapParams& params,
                                 const EpochCallback& on_epoch) {
  if (params.epochs < 1) throw std::invalid_argument("optimize_layout: epochs must be >= 1");
  const std::size_t n = graph.n;
  Eigen::MatrixX2d coords = initialize_layout(graph, params);
  if (n == 0) return coords;

  const CurveParams curve = fit_output_curve(params.min_dist, params.spread);
  const EdgeSchedule schedule = build_schedule(graph);
  std::vector<double> next_sample = schedule.epochs_per_sample;
  std::vector<double> next_negative = schedule.epochs_per_sample;
  for (double& v : next_negative) v /= params.negative_sample_rate;

  const bool serial = params.deterministic || params.threads <= 1;
  const std::size_t n_edges = schedule.head.size();

  if (serial) {
    std::mt19937_64 rng(derive_seed(params.seed, 0x1a70'0003ULL));
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
      run_epochs(coords, schedule, n, params, curve.a, curve.b, 0, n_edges, next_sample,
                 next_negative, rng, epoch);
      if (on_epoch) on_epoch(epoch, coords);
    }
  } else {
    // Unsynchronized writes across edge blocks; permitted only outside
    // deterministic mode.
    const unsigned threads = params.threads;
    std::vector<std::mt19937_64> rngs;
    rngs.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) rngs.emplace_back(derive_seed(params.seed, 0x1a70'0004ULL, t));
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
      parallel_for_blocks(n_edges, threads, [&](std::size_t begin, std::size_t end) {
        const unsigned slot = static_cast<unsigned>(begin * threads / std::max<std::size_t>(1, n_edges));
        run_epochs(coords, schedule, n, params, curve.a, curve.b, begin, end, next_sample,
                   next_negative, rngs[std::min(slot, threads - 1)], epoch);
      });
      if (on_epoch) on_epoch(epoch, coords);
    }
  }

  if (!coords.allFinite()) throw std::runtime_error("optimize_layout: non-finite coordinates");
  return coords;
}

Embedding2D project_users(const UserVectorMap& vectors, const std::vector<std::string>& subset,
                          const UmapParams& params) {
  const KnnGraph knn = knn_graph(vectors, subset, params.k, params.threads);
  const FuzzyGraph graph = fuzzy_weights(knn);
  Embedding2D emb;
  emb.user_ids = subset;
  emb.coords = optimize_layout(graph, params);
  return emb;
}

}  // namespace stance
