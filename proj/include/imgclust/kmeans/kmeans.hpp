#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "imgclust/common/feature_matrix.hpp"

namespace imgclust::kmeans {

// Cluster count used when the caller does not choose one.
inline constexpr std::size_t kDefaultClusterCount = 150;

struct FitOptions {
  std::size_t k = kDefaultClusterCount;
  std::uint64_t seed = 0;
  std::size_t max_iters = 100;
  double tol = 1e-4;         // stop when relative inertia improvement < tol
  std::size_t workers = 1;   // 0 = hardware concurrency; results do not depend on it
};

// Fitted state. Points are identified by their matrix ordinals; `ordinals` is
// ascending and `assignments[i]` is the cluster of `ordinals[i]`.
struct ClusterModel {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<float> centroids;  // k x dim, row-major
  std::vector<std::uint64_t> ordinals;
  std::vector<std::uint32_t> assignments;
  double inertia = 0.0;
  std::size_t iterations_run = 0;  // centroid update steps performed
  std::uint64_t seed = 0;
  // Inertia after every assignment step, first entry from the seeded centroids.
  std::vector<double> inertia_history;

  std::span<const float> centroid(std::size_t c) const { return {centroids.data() + c * dim, dim}; }
  std::optional<std::uint32_t> cluster_of(std::uint64_t ordinal) const;
};

// `requested` if given; otherwise the default of 150, clamped to the number of
// points for corpora smaller than that.
std::size_t resolve_cluster_count(std::optional<std::size_t> requested, std::size_t points);

// k-means++ seeding followed by Lloyd iterations. Empty clusters are repaired
// by moving their centroid onto the point farthest from its own centroid.
// The result depends only on (vectors as an ordinal-keyed set, k, seed): row
// order and worker count do not matter.
// Throws ValidationError for k == 0, k > rows, duplicate ordinals, dim == 0.
ClusterModel kmeans_fit(const FeatureMatrix& vectors, const FitOptions& options);

// Nearest centroid by squared Euclidean distance, lowest index on ties.
// Throws ValidationError on a dim mismatch.
std::uint32_t assign(const ClusterModel& model, std::span<const float> vector);

// Sum of squared distances of each point to its assigned centroid.
double compute_inertia(const ClusterModel& model, const FeatureMatrix& vectors);

}  // namespace imgclust::kmeans
