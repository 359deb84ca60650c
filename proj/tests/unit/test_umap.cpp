#include <doctest.h>

#include <cmath>
#include <random>

#include "stance/umap.hpp"

#include "test_util.hpp"

using namespace stance;

namespace {

UserVectorMap identical_vectors(int n) {
  UserVectorMap vectors;
  for (int i = 0; i < n; ++i) {
    UserVector v;
    v.user_id = "u" + std::to_string(i);
    v.counts = {{"a", 2}, {"b", 3}};
    vectors[v.user_id] = std::move(v);
  }
  return vectors;
}

std::vector<std::string> ids_of(const UserVectorMap& m) {
  std::vector<std::string> ids;
  for (const auto& [id, _] : m) ids.push_back(id);
  return ids;
}

// Independent bisection for the smooth-knn bandwidth, used as the oracle for
// fuzzy_weights.
double solve_sigma(const std::vector<double>& dists, double rho, double target) {
  double lo = 1e-12, hi = 1e6;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    double sum = 0;
    for (double d : dists) sum += d - rho > 0 ? std::exp(-(d - rho) / mid) : 1.0;
    if (sum > target)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("knn_graph: identical vectors link to everything at distance 0") {
  const auto vectors = identical_vectors(3);
  const auto g = knn_graph(vectors, ids_of(vectors), 2);
  REQUIRE(g.size() == 3);
  for (const auto& nbrs : g.neighbors) {
    REQUIRE(nbrs.size() == 2);
    for (const auto& nb : nbrs) CHECK(nb.distance == doctest::Approx(0.0).epsilon(1e-12));
  }
  // each node sees both others
  CHECK(g.neighbors[0][0].index + g.neighbors[0][1].index == 3);
}

TEST_CASE("knn_graph: two tight groups stay separate") {
  UserVectorMap vectors;
  for (int g = 0; g < 2; ++g) {
    for (int i = 0; i < 5; ++i) {
      UserVector v;
      v.user_id = (g == 0 ? "a" : "b") + std::to_string(i);
      v.counts = {{g == 0 ? "x" : "y", 1 + i}};  // same support per group
      vectors[v.user_id] = std::move(v);
    }
  }
  const auto ids = ids_of(vectors);
  const auto g = knn_graph(vectors, ids, 4);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (const auto& nb : g.neighbors[i]) {
      CHECK(ids[i][0] == ids[nb.index][0]);  // same-group prefix
    }
  }
}

TEST_CASE("knn_graph: k >= n is an error") {
  const auto vectors = identical_vectors(3);
  CHECK_THROWS_AS(knn_graph(vectors, ids_of(vectors), 5), std::invalid_argument);
  CHECK_THROWS_AS(knn_graph(vectors, ids_of(vectors), 3), std::invalid_argument);
  CHECK_THROWS_AS(knn_graph(vectors, ids_of(vectors), 1), std::invalid_argument);
}

TEST_CASE("knn_graph from a similarity matrix matches the vector route") {
  const auto vectors = testutil::planted_vectors(10, 12, 99);
  const auto ids = ids_of(vectors);
  const auto direct = knn_graph(vectors, ids, 5);
  const auto via_matrix = knn_graph(similarity_matrix(vectors, ids), 5);
  REQUIRE(direct.size() == via_matrix.size());
  for (std::size_t i = 0; i < direct.size(); ++i) {
    REQUIRE(direct.neighbors[i].size() == via_matrix.neighbors[i].size());
    for (std::size_t j = 0; j < direct.neighbors[i].size(); ++j) {
      CHECK(direct.neighbors[i][j].index == via_matrix.neighbors[i][j].index);
      CHECK(direct.neighbors[i][j].distance ==
            doctest::Approx(via_matrix.neighbors[i][j].distance).epsilon(1e-12));
    }
  }
}

TEST_CASE("fuzzy_weights: equal distances give equal weights") {
  const auto vectors = identical_vectors(4);
  const auto fuzzy = fuzzy_weights(knn_graph(vectors, ids_of(vectors), 3));
  REQUIRE(!fuzzy.edges.empty());
  for (const auto& e : fuzzy.edges) CHECK(e.weight == doctest::Approx(1.0));
}

TEST_CASE("fuzzy_weights: nearest neighbor weight is 1 and symmetrization is a+b-ab") {
  // hand-built 4-node kNN graph, k=3
  KnnGraph g;
  g.neighbors = {
      {{1, 1.0}, {2, 2.0}, {3, 3.0}},
      {{0, 1.0}, {2, 1.5}, {3, 2.5}},
      {{1, 1.5}, {0, 2.0}, {3, 2.2}},
      {{2, 2.2}, {1, 2.5}, {0, 3.0}},
  };
  const auto fuzzy = fuzzy_weights(g);
  REQUIRE(fuzzy.n == 4);

  const double target = std::log2(3.0);
  auto membership = [&](double rho, const std::vector<double>& dists, double d) {
    const double sigma = solve_sigma(dists, rho, target);
    return d - rho > 0 ? std::exp(-(d - rho) / sigma) : 1.0;
  };
  // directed memberships from the oracle
  const double w01 = membership(1.0, {1.0, 2.0, 3.0}, 1.0);  // = 1 (rho shift)
  const double w02 = membership(1.0, {1.0, 2.0, 3.0}, 2.0);
  const double w10 = membership(1.0, {1.0, 1.5, 2.5}, 1.0);  // = 1
  const double w20 = membership(1.5, {1.5, 2.0, 2.2}, 2.0);
  CHECK(w01 == doctest::Approx(1.0));
  CHECK(w10 == doctest::Approx(1.0));

  auto find_edge = [&](std::uint32_t a, std::uint32_t b) {
    for (const auto& e : fuzzy.edges) {
      if (e.a == a && e.b == b) return e.weight;
    }
    FAIL("edge not found");
    return 0.0;
  };
  // reciprocal (1,1) edge stays 1; the (w02, w20) edge follows a+b-ab
  CHECK(find_edge(0, 1) == doctest::Approx(w01 + w10 - w01 * w10).epsilon(1e-6));
  CHECK(find_edge(0, 1) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(find_edge(0, 2) == doctest::Approx(w02 + w20 - w02 * w20).epsilon(1e-4));

  for (const auto& e : fuzzy.edges) {
    CHECK(e.weight > 0.0);
    CHECK(e.weight <= 1.0);
    CHECK(e.a < e.b);
  }
}

TEST_CASE("fit_output_curve reproduces the reference least-squares fit") {
  // reference values computed with the canonical 300-sample fit
  const CurveParams md01 = fit_output_curve(0.1);
  CHECK(md01.a == doctest::Approx(1.5769434603).epsilon(2e-3));
  CHECK(md01.b == doctest::Approx(0.8950608779).epsilon(2e-3));

  const CurveParams md001 = fit_output_curve(0.01);
  CHECK(md001.a == doctest::Approx(1.8956058664).epsilon(2e-3));
  CHECK(md001.b == doctest::Approx(0.8006378443).epsilon(2e-3));

  const CurveParams md05 = fit_output_curve(0.5);
  CHECK(md05.a == doctest::Approx(0.5830300203).epsilon(2e-3));
  CHECK(md05.b == doctest::Approx(1.3341669924).epsilon(2e-3));
}

TEST_CASE("optimize_layout: same seed twice is bit-identical") {
  const auto vectors = testutil::planted_vectors(20, 15, 5);
  const auto ids = ids_of(vectors);
  UmapParams params;
  params.k = 6;
  params.epochs = 50;
  params.seed = 77;

  const auto fuzzy = fuzzy_weights(knn_graph(vectors, ids, params.k));
  const auto a = optimize_layout(fuzzy, params);
  const auto b = optimize_layout(fuzzy, params);
  REQUIRE(a.rows() == b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    CHECK(a(i, 0) == b(i, 0));
    CHECK(a(i, 1) == b(i, 1));
  }
}

TEST_CASE("optimize_layout: single node stays at initialization") {
  FuzzyGraph g;
  g.n = 1;
  UmapParams params;
  params.epochs = 1;
  const auto once = optimize_layout(g, params);
  params.epochs = 200;
  const auto many = optimize_layout(g, params);
  REQUIRE(once.rows() == 1);
  CHECK(once(0, 0) == many(0, 0));  // no edges -> no updates at any epoch count
  CHECK(once(0, 1) == many(0, 1));
}

TEST_CASE("optimize_layout: disjoint cliques separate monotonically past 3x spread") {
  // two cliques of 8, all intra distances ~0, no cross edges
  UserVectorMap vectors;
  for (int g = 0; g < 2; ++g) {
    for (int i = 0; i < 8; ++i) {
      UserVector v;
      v.user_id = (g == 0 ? "a" : "b") + std::to_string(i);
      v.counts = {{g == 0 ? "x" : "y", 4}};
      vectors[v.user_id] = std::move(v);
    }
  }
  const auto ids = ids_of(vectors);
  const auto fuzzy = fuzzy_weights(knn_graph(vectors, ids, 3));
  for (const auto& e : fuzzy.edges) CHECK(ids[e.a][0] == ids[e.b][0]);  // zero cross-weights

  UmapParams params;
  params.k = 3;
  params.epochs = 200;
  params.seed = 3;
  params.spectral_init = false;  // start mixed so separation must be earned

  std::vector<double> separations;
  std::vector<double> spreads;
  const auto measure = [&](const Eigen::MatrixX2d& coords) {
    Eigen::RowVector2d ca = Eigen::RowVector2d::Zero(), cb = Eigen::RowVector2d::Zero();
    for (int i = 0; i < 8; ++i) ca += coords.row(i);
    for (int i = 8; i < 16; ++i) cb += coords.row(i);
    ca /= 8;
    cb /= 8;
    double spread = 0;
    for (int i = 0; i < 8; ++i) spread += (coords.row(i) - ca).norm();
    for (int i = 8; i < 16; ++i) spread += (coords.row(i) - cb).norm();
    separations.push_back((ca - cb).norm());
    spreads.push_back(spread / 16);
  };

  optimize_layout(fuzzy, params, [&](int epoch, const Eigen::MatrixX2d& coords) {
    if ((epoch + 1) % 25 == 0) measure(coords);
  });

  REQUIRE(separations.size() == 8);
  // ordering assertion: grows checkpoint over checkpoint until past the gate
  std::size_t crossed = separations.size();
  for (std::size_t i = 0; i < separations.size(); ++i) {
    if (separations[i] > 3 * spreads[i]) {
      crossed = i;
      break;
    }
    if (i > 0) CHECK(separations[i] > separations[i - 1]);
  }
  REQUIRE_MESSAGE(crossed < separations.size(), "separation never exceeded 3x spread");
}

TEST_CASE("projection quality gate: silhouette >= 0.8 on planted clusters, 3 seeds") {
  for (const std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const auto vectors = testutil::planted_vectors(40, 25, 1000 + seed);
    const auto ids = ids_of(vectors);
    UmapParams params;
    params.k = 10;
    params.epochs = 200;
    params.seed = seed;

    const Embedding2D emb = project_users(vectors, ids, params);
    REQUIRE(emb.coords.rows() == static_cast<Eigen::Index>(ids.size()));
    CHECK(emb.coords.allFinite());

    std::vector<int> truth;
    for (const auto& id : ids) truth.push_back(id[1] == 'a' ? 0 : 1);
    const double score = testutil::silhouette(emb.coords, truth);
    CHECK_MESSAGE(score >= 0.8, "seed ", seed, " silhouette ", score);
  }
}
