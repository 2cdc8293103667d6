#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "imgclust/common/feature_matrix.hpp"

namespace imgclust::ann {

// Row index used as NeighborList::query when the query is a free vector.
inline constexpr std::uint64_t kFreeQuery = std::numeric_limits<std::uint64_t>::max();

struct Neighbor {
  std::uint64_t index;  // row in the indexed FeatureMatrix
  double distance;      // Euclidean

  bool operator==(const Neighbor&) const = default;
};

// Sorted by distance ascending, row index ascending on ties.
struct NeighborList {
  std::uint64_t query = kFreeQuery;
  std::size_t k = 0;
  std::vector<Neighbor> neighbors;

  bool operator==(const NeighborList&) const = default;
};

// Similarity-matrix route: exact linear scan with float64 accumulation.
// The query row itself is excluded. Throws ValidationError for k == 0,
// fewer than 2 rows, or an out-of-range query row.
NeighborList exact_knn(const FeatureMatrix& vectors, std::size_t query_row, std::size_t k);

// Free-vector variant; `exclude_row`, if set, is skipped.
NeighborList exact_knn(const FeatureMatrix& vectors, std::span<const float> query, std::size_t k,
                       std::optional<std::size_t> exclude_row = std::nullopt);

// Bytes for a full N x N float32 distance matrix.
constexpr std::uint64_t similarity_matrix_bytes(std::uint64_t n) { return n * n * 4; }

// Common surface for approximate backends.
class NeighborIndex {
 public:
  virtual ~NeighborIndex() = default;
  virtual NeighborList query(const FeatureMatrix& vectors, std::span<const float> query, std::size_t k,
                             std::optional<std::size_t> exclude_row = std::nullopt) const = 0;
  virtual std::size_t size() const = 0;
  // Footprint of the index structure itself, excluding the vectors.
  virtual std::uint64_t memory_bytes() const = 0;
};

}  // namespace imgclust::ann
