#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "fixtures.hpp"
#include "imgclust/ann/kd_forest.hpp"
#include "imgclust/ann/neighbors.hpp"
#include "imgclust/ann/precision.hpp"
#include "imgclust/common/errors.hpp"
#include "oracles.hpp"

using namespace imgclust;
using namespace imgclust::ann;

namespace {

FeatureMatrix line(std::initializer_list<float> xs) {
  FeatureMatrix m(1);
  std::uint64_t i = 0;
  for (float x : xs) m.append(i++, std::span<const float>(&x, 1));
  return m;
}

ForestParams params(std::size_t trees, std::size_t checks, std::uint64_t seed = 0, std::size_t leaf = 16) {
  ForestParams p;
  p.tree_count = trees;
  p.checks = checks;
  p.seed = seed;
  p.leaf_size = leaf;
  return p;
}

double mean_recall(const FeatureMatrix& m, const KdForest& f, std::size_t k, std::size_t queries,
                   std::size_t checks) {
  double total = 0.0;
  for (std::size_t q = 0; q < queries; ++q) {
    const auto exact = exact_knn(m, q, k);
    const auto approx = f.query(m, m.row(q), k, q, checks);
    std::set<std::uint64_t> truth;
    for (const auto& n : exact.neighbors) truth.insert(n.index);
    std::size_t hit = 0;
    for (const auto& n : approx.neighbors) hit += truth.count(n.index);
    total += static_cast<double>(hit) / static_cast<double>(k);
  }
  return total / static_cast<double>(queries);
}

}  // namespace

TEST_CASE("exact knn on three points on a line") {
  const auto m = line({0.0f, 1.0f, 5.0f});
  const auto r = exact_knn(m, 0, 2);
  REQUIRE(r.neighbors.size() == 2);
  CHECK(r.neighbors[0] == Neighbor{1, 1.0});
  CHECK(r.neighbors[1] == Neighbor{2, 5.0});
  CHECK(r.query == 0);
  CHECK(exact_knn(m, 2, 10).neighbors.size() == 2);
}

TEST_CASE("exact knn ties break by row") {
  const auto m = line({3.0f, 3.0f, 3.0f, 1.0f});
  const auto r = exact_knn(m, 1, 3);
  CHECK(r.neighbors[0] == Neighbor{0, 0.0});
  CHECK(r.neighbors[1] == Neighbor{2, 0.0});
  CHECK(r.neighbors[2] == Neighbor{3, 2.0});
}

TEST_CASE("exact knn agrees with a brute-force double loop") {
  const auto m = testing::gaussian_matrix(100, 16, 21);
  for (std::size_t q = 0; q < m.rows(); ++q) {
    const auto oracle = testing::brute_force_knn(m.values(), m.dim(), q, 7);
    const auto got = exact_knn(m, q, 7);
    REQUIRE(got.neighbors.size() == oracle.size());
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      CHECK(got.neighbors[i].index == oracle[i].first);
      CHECK(got.neighbors[i].distance == doctest::Approx(std::sqrt(oracle[i].second)).epsilon(1e-12));
    }
  }
}

TEST_CASE("exact knn validation") {
  const auto one = line({1.0f});
  CHECK_THROWS_AS(exact_knn(one, 0, 1), ValidationError);
  const auto m = line({1.0f, 2.0f});
  CHECK_THROWS_AS(exact_knn(m, 0, 0), ValidationError);
  CHECK_THROWS_AS(exact_knn(m, 5, 1), ValidationError);
  CHECK_THROWS_AS(exact_knn(m, std::vector<float>{1.0f, 2.0f}, 1), ValidationError);
}

TEST_CASE("similarity matrix footprint") {
  CHECK(similarity_matrix_bytes(100000) == 40000000000ULL);
  CHECK(similarity_matrix_bytes(0) == 0);
}

TEST_CASE("forest census: every row appears once per tree") {
  const auto m = testing::gaussian_matrix(1000, 64, 5);
  const auto f = KdForest::build(m, params(4, 256, 1));
  CHECK(f.tree_count() == 4);
  CHECK(f.size() == 1000);
  for (std::size_t t = 0; t < f.tree_count(); ++t) {
    auto pts = f.tree_points(t);
    std::sort(pts.begin(), pts.end());
    REQUIRE(pts.size() == 1000);
    for (std::uint32_t i = 0; i < 1000; ++i) CHECK(pts[i] == i);
    // Median splits keep the tree balanced: depth about log2(N / leaf).
    CHECK(f.depth(t) <= 8);
  }
  // Different trees see different splits.
  CHECK(f.tree_points(0) != f.tree_points(1));
}

TEST_CASE("small and degenerate inputs") {
  SUBCASE("fewer points than a leaf") {
    const auto m = testing::uniform_matrix(10, 4, 2);
    const auto f = KdForest::build(m, params(3, 256));
    CHECK(f.leaf_count() == 3);
    CHECK(f.query(m, m.row(0), 3, 0) == exact_knn(m, 0, 3));
  }
  SUBCASE("all vectors identical") {
    FeatureMatrix m(3);
    for (std::uint64_t i = 0; i < 100; ++i) m.append(i, std::vector<float>{1, 1, 1});
    const auto f = KdForest::build(m, params(2, 256, 0, 4));
    const auto r = f.query(m, m.row(7), 5, 7);
    REQUIRE(r.neighbors.size() == 5);
    for (const auto& n : r.neighbors) CHECK(n.distance == 0.0);
    CHECK(r == exact_knn(m, 7, 5));
  }
  SUBCASE("heavy duplicates on the split dimension") {
    FeatureMatrix m(2);
    for (std::uint64_t i = 0; i < 200; ++i) m.append(i, std::vector<float>{i < 150 ? 0.0f : 1.0f, 0.0f});
    const auto f = KdForest::build(m, params(2, kExhaustiveChecks, 0, 4));
    for (std::uint32_t t = 0; t < 2; ++t) CHECK(f.tree_points(t).size() == 200);
    CHECK(f.query(m, m.row(160), 10, 160) == exact_knn(m, 160, 10));
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(KdForest::build(FeatureMatrix(4), params(1, 1)), ValidationError);
    const auto m = testing::uniform_matrix(10, 4, 2);
    CHECK_THROWS_AS(KdForest::build(m, params(0, 1)), ValidationError);
    CHECK_THROWS_AS(KdForest::build(m, params(1, 1, 0, 0)), ValidationError);
  }
}

TEST_CASE("exhaustive checks reproduce the exact answer") {
  const auto m = testing::gaussian_matrix(500, 32, 9);
  const auto f = KdForest::build(m, params(3, kExhaustiveChecks, 4));
  for (std::size_t q = 0; q < m.rows(); ++q) {
    CHECK(query_knn(f, m, q, 10) == exact_knn(m, q, 10));
  }
}

TEST_CASE("self query without exclusion returns the point at distance zero") {
  const auto m = testing::gaussian_matrix(2000, 32, 3);
  const auto f = KdForest::build(m, ForestParams{});
  for (std::size_t q = 0; q < 50; ++q) {
    const auto r = query_knn(f, m, m.row(q), 5);
    REQUIRE_FALSE(r.neighbors.empty());
    CHECK(r.neighbors[0].index == q);
    CHECK(r.neighbors[0].distance == 0.0);
  }
}

TEST_CASE("default parameters give recall@50 of at least 0.8") {
  const auto m = testing::gaussian_matrix(5000, 128, 17);
  const auto f = KdForest::build(m, ForestParams{});
  const double recall = mean_recall(m, f, 50, 100, f.params().checks);
  MESSAGE("recall@50 = " << recall);
  CHECK(recall >= 0.8);
}

TEST_CASE("recall does not drop with more checks or more trees") {
  const auto m = testing::gaussian_matrix(3000, 64, 23);
  const auto f = KdForest::build(m, params(8, 256, 2));
  double prev = 0.0;
  for (std::size_t checks : {32, 128, 512}) {
    const double r = mean_recall(m, f, 20, 60, checks);
    CHECK(r >= prev - 0.02);
    prev = r;
  }
  prev = 0.0;
  for (std::size_t trees : {1, 4, 8}) {
    const auto ft = KdForest::build(m, params(trees, 128, 2));
    const double r = mean_recall(m, ft, 20, 60, 128);
    CHECK(r >= prev - 0.02);
    prev = r;
  }
}

TEST_CASE("forest is deterministic for a seed") {
  const auto m = testing::gaussian_matrix(800, 16, 1);
  const auto a = KdForest::build(m, params(4, 64, 42));
  const auto b = KdForest::build(m, params(4, 64, 42));
  for (std::size_t t = 0; t < 4; ++t) CHECK(a.tree_points(t) == b.tree_points(t));
  for (std::size_t q = 0; q < 20; ++q) CHECK(a.query(m, m.row(q), 10, q) == b.query(m, m.row(q), 10, q));
  CHECK(a.memory_bytes() == b.memory_bytes());
}

TEST_CASE("neighbor distances are symmetric") {
  const auto m = testing::gaussian_matrix(300, 8, 6);
  const auto f = KdForest::build(m, params(4, kExhaustiveChecks));
  for (std::size_t q = 0; q < 20; ++q) {
    for (const auto& n : query_knn(f, m, q, 5).neighbors) {
      const auto back = exact_knn(m, n.index, m.rows() - 1);
      const auto it = std::find_if(back.neighbors.begin(), back.neighbors.end(),
                                   [&](const Neighbor& x) { return x.index == q; });
      REQUIRE(it != back.neighbors.end());
      CHECK(it->distance == n.distance);
    }
  }
}

TEST_CASE("precision report") {
  const auto m = testing::gaussian_matrix(1000, 16, 12);
  SUBCASE("exhaustive index is perfect at every rank") {
    const auto f = KdForest::build(m, params(2, kExhaustiveChecks));
    const auto report = precision_at_k(m, f, 10, 40, 1);
    CHECK(report.queries == 40);
    CHECK(report.precision.size() == 10);
    for (double p : report.precision) CHECK(p == 1.0);
    CHECK(report.similarity_matrix_bytes == 1000ULL * 1000 * 4);
    CHECK(report.index_bytes == f.memory_bytes());
  }
  SUBCASE("approximate index stays in [0, 1] and serializes") {
    const auto f = KdForest::build(m, params(1, 2));
    const auto report = precision_at_k(m, f, 10, 40, 1, 0.25);
    for (double p : report.precision) {
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
    }
    CHECK(report.build_seconds == 0.25);
    const std::string csv = precision_csv(report);
    CHECK(csv.find("rank,precision\n1,") != std::string::npos);
    CHECK(csv.rfind("#", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') >= 11);
    CHECK(report.mean_precision(1, 10) == doctest::Approx(
        std::accumulate(report.precision.begin(), report.precision.end(), 0.0) / 10));
  }
  SUBCASE("sample larger than the set uses every row") {
    const auto f = KdForest::build(m, params(2, 64));
    CHECK(precision_at_k(m, f, 5, 5000).queries == 1000);
  }
}
