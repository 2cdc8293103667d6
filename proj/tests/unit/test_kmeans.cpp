#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "imgclust/common/errors.hpp"
#include "imgclust/corpus/corpus.hpp"
#include "imgclust/kmeans/kmeans.hpp"
#include "imgclust/kmeans/model_file.hpp"
#include "imgclust/kmeans/summary.hpp"
#include "oracles.hpp"

using namespace imgclust;
using namespace imgclust::kmeans;

namespace {

FeatureMatrix from_points(std::span<const testing::Point2> pts) {
  FeatureMatrix m(2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const float v[2] = {static_cast<float>(pts[i].x), static_cast<float>(pts[i].y)};
    m.append(i, v);
  }
  return m;
}

std::vector<testing::Point2> triplets() {
  // Three clusters of three points plus three extra points near the first
  // two: 12 points, optimum is not just the obvious split of the triplets.
  return {{0, 0},   {1, 0},   {0, 1},   {10, 10}, {11, 10}, {10, 11},
          {20, 0},  {21, 0},  {20, 1},  {0.5, 0.5}, {10.5, 10.5}, {20.5, 0.5}};
}

FitOptions opts(std::size_t k, std::uint64_t seed = 7) {
  FitOptions o;
  o.k = k;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("default cluster count") {
  CHECK(kDefaultClusterCount == 150);
  CHECK(resolve_cluster_count(std::nullopt, 10000) == 150);
  CHECK(resolve_cluster_count(std::nullopt, 40) == 40);
  CHECK(resolve_cluster_count(std::size_t{12}, 10000) == 12);
  CHECK(resolve_cluster_count(std::size_t{500}, 100) == 500);
}

TEST_CASE("k = 1 gives the mean and N times the variance") {
  const auto m = testing::uniform_matrix(200, 5, 3);
  const auto model = kmeans_fit(m, opts(1));
  double total = 0.0;
  for (std::size_t d = 0; d < 5; ++d) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) mean += m.row(i)[d];
    mean /= static_cast<double>(m.rows());
    CHECK(model.centroids[d] == doctest::Approx(mean).epsilon(1e-6));
    for (std::size_t i = 0; i < m.rows(); ++i) total += (m.row(i)[d] - mean) * (m.row(i)[d] - mean);
  }
  CHECK(model.inertia == doctest::Approx(total).epsilon(1e-6));
}

TEST_CASE("k distinct locations give zero inertia") {
  FeatureMatrix m(3);
  for (std::uint64_t i = 0; i < 30; ++i) {
    const float v[3] = {static_cast<float>(i % 5), static_cast<float>(i % 5) * 2.0f, -1.0f};
    m.append(i, v);
  }
  const auto model = kmeans_fit(m, opts(5));
  CHECK(model.inertia == 0.0);
  for (std::uint64_t i = 0; i < 30; ++i) {
    CHECK(model.cluster_of(i) == model.cluster_of(i % 5));
  }
}

TEST_CASE("twelve points reach the enumerated optimum") {
  const auto pts = triplets();
  const double optimum = testing::optimal_partition_inertia(pts, 3);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto model = kmeans_fit(from_points(pts), opts(3, seed));
    CHECK(std::abs(model.inertia - optimum) <= 1e-9 * optimum);
  }
}

TEST_CASE("never better than the optimum on small random sets") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<testing::Point2> pts(8);
    for (auto& p : pts) p = {u(rng), u(rng)};
    // Round to float first so both sides see the same coordinates.
    for (auto& p : pts) p = {static_cast<float>(p.x), static_cast<float>(p.y)};
    const double optimum = testing::optimal_partition_inertia(pts, 3);
    const auto model = kmeans_fit(from_points(pts), opts(3, trial));
    CHECK(model.inertia >= optimum * (1 - 1e-9));
  }
}

TEST_CASE("inertia history is non-increasing and iterations are counted") {
  const auto m = testing::gaussian_matrix(1500, 16, 1);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto model = kmeans_fit(m, opts(20, seed));
    REQUIRE(model.inertia_history.size() >= 2);
    for (std::size_t i = 1; i < model.inertia_history.size(); ++i) {
      CHECK(model.inertia_history[i] <= model.inertia_history[i - 1] * (1 + 1e-9));
    }
    CHECK(model.inertia_history.size() == model.iterations_run + 1);
    CHECK(model.inertia == doctest::Approx(model.inertia_history.back()));
    CHECK(model.inertia == doctest::Approx(compute_inertia(model, m)).epsilon(1e-9));
  }
  FitOptions capped = opts(20);
  capped.max_iters = 2;
  CHECK(kmeans_fit(m, capped).iterations_run <= 2);
}

TEST_CASE("final assignments are nearest-centroid") {
  const auto m = testing::gaussian_matrix(800, 8, 2);
  const auto model = kmeans_fit(m, opts(12));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto c = *model.cluster_of(m.ordinal(i));
    const double own = squared_distance(m.row(i), model.centroid(c));
    for (std::size_t j = 0; j < model.k; ++j) CHECK(own <= squared_distance(m.row(i), model.centroid(j)));
    CHECK(assign(model, m.row(i)) == c);
  }
  std::vector<std::size_t> sizes(model.k);
  for (auto a : model.assignments) ++sizes[a];
  for (auto s : sizes) CHECK(s > 0);
}

TEST_CASE("result depends on the point set, not on row order or workers") {
  const auto m = testing::gaussian_matrix(600, 10, 4);
  FitOptions one = opts(9, 99);
  const auto base = kmeans_fit(m, one);

  FitOptions many = one;
  many.workers = 4;
  const auto parallel = kmeans_fit(m, many);
  CHECK(parallel.centroids == base.centroids);
  CHECK(parallel.assignments == base.assignments);
  CHECK(parallel.inertia == base.inertia);

  std::vector<std::size_t> perm(m.rows());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937(3));
  FeatureMatrix shuffled(m.dim());
  for (auto i : perm) shuffled.append(m.ordinal(i), m.row(i));
  const auto permuted = kmeans_fit(shuffled, one);
  CHECK(permuted.centroids == base.centroids);
  CHECK(permuted.ordinals == base.ordinals);
  CHECK(permuted.assignments == base.assignments);

  CHECK(kmeans_fit(m, opts(9, 100)).centroids != base.centroids);
}

TEST_CASE("empty clusters are repaired") {
  // Far more clusters than natural groups, many duplicate points.
  FeatureMatrix m(2);
  for (std::uint64_t i = 0; i < 40; ++i) {
    const float v[2] = {static_cast<float>(i % 4 == 0 ? 100 + i : 0), 0.0f};
    m.append(i, v);
  }
  const auto model = kmeans_fit(m, opts(11));
  std::vector<std::size_t> sizes(model.k);
  for (auto a : model.assignments) ++sizes[a];
  CHECK(std::count(sizes.begin(), sizes.end(), 0u) == 0);
}

TEST_CASE("argument validation") {
  const auto m = testing::uniform_matrix(5, 3, 1);
  CHECK_THROWS_AS(kmeans_fit(m, opts(0)), ValidationError);
  CHECK_THROWS_AS(kmeans_fit(m, opts(6)), ValidationError);
  FeatureMatrix dup(2);
  dup.append(1, std::vector<float>{0, 0});
  dup.append(1, std::vector<float>{1, 1});
  CHECK_THROWS_AS(kmeans_fit(dup, opts(1)), ValidationError);
  const auto model = kmeans_fit(m, opts(2));
  CHECK_THROWS_AS(assign(model, std::vector<float>{1, 2}), ValidationError);
}

TEST_CASE("assign breaks ties toward the lower index") {
  ClusterModel model;
  model.k = 2;
  model.dim = 1;
  model.centroids = {-1.0f, 1.0f};
  CHECK(assign(model, std::vector<float>{0.0f}) == 0);
  CHECK(assign(model, std::vector<float>{0.5f}) == 1);
}

TEST_CASE("model file round trip") {
  const auto m = testing::gaussian_matrix(100, 6, 8);
  const auto model = kmeans_fit(m, opts(4, 123));
  const auto back = decode_model(encode_model(model));
  CHECK(back.k == model.k);
  CHECK(back.dim == model.dim);
  CHECK(back.seed == 123);
  CHECK(back.inertia == model.inertia);
  CHECK(back.iterations_run == model.iterations_run);
  CHECK(back.centroids == model.centroids);
  CHECK(back.ordinals == model.ordinals);
  CHECK(back.assignments == model.assignments);
  const std::string bytes = encode_model(model);
  CHECK_THROWS_AS(decode_model(bytes.substr(0, bytes.size() - 3)), ValidationError);
  CHECK_THROWS_AS(decode_model("KMEANS2" + bytes.substr(7)), ValidationError);
}

namespace {

// Manifest + groups for `reps` representatives where representative i has
// `freq[i]` byte-identical copies.
struct Fixture {
  std::vector<corpus::ImageRecord> manifest;
  std::vector<corpus::DedupGroup> groups;
  FeatureMatrix reps{2};
};

Fixture make_fixture(const std::vector<std::pair<float, std::size_t>>& reps) {
  Fixture f;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    corpus::DedupGroup g;
    g.content_hash = g.group_id = "hash" + std::to_string(i);
    g.frequency = reps[i].second;
    for (std::size_t c = 0; c < reps[i].second; ++c) {
      corpus::ImageRecord r;
      r.path = "g" + std::to_string(i) + "/" + std::to_string(c) + ".png";
      r.image_id = corpus::image_id_for_path(r.path);
      r.format = "png";
      r.content_hash = r.dedup_group_id = g.group_id;
      if (c == 0) {
        g.representative_image_id = r.image_id;
        const float v[2] = {reps[i].first, 0.0f};
        f.reps.append(f.manifest.size(), v);
      }
      g.member_ids.push_back(r.image_id);
      f.manifest.push_back(r);
    }
    f.groups.push_back(g);
  }
  return f;
}

}  // namespace

TEST_CASE("cluster summaries expand through dedup groups") {
  // Cluster near 0: one representative carrying 40 copies plus two singletons.
  // Cluster near 100: a lone singleton.
  const auto f = make_fixture({{0.0f, 40}, {1.0f, 1}, {-1.5f, 1}, {100.0f, 1}});
  const auto model = kmeans_fit(f.reps, opts(2));
  const auto summaries = summarize_clusters(model, f.reps, f.manifest, f.groups, 2);
  REQUIRE(summaries.size() == 2);
  const auto& big = summaries[*model.cluster_of(0)];
  const auto& lone = summaries[*model.cluster_of(f.reps.ordinal(3))];
  CHECK(big.size_representatives == 3);
  CHECK(big.size_total_images == 42);
  CHECK(big.sample_image_ids.size() == 2);
  CHECK(lone.size_representatives == 1);
  CHECK(lone.size_total_images == 1);
  CHECK(lone.medoid_image_id == f.manifest[f.reps.ordinal(3)].image_id);
  CHECK(lone.sample_image_ids == std::vector<std::string>{lone.medoid_image_id});

  std::size_t reps = 0, images = 0;
  for (const auto& s : summaries) {
    reps += s.size_representatives;
    images += s.size_total_images;
  }
  CHECK(reps == f.reps.rows());
  CHECK(images == f.manifest.size());

  const auto ranked = rank_members(model, f.reps, f.manifest);
  for (const auto& members : ranked) {
    for (std::size_t i = 1; i < members.size(); ++i) CHECK(members[i - 1].distance <= members[i].distance);
  }
  CHECK(big.medoid_image_id == f.manifest[ranked[big.cluster_index][0].ordinal].image_id);
}
