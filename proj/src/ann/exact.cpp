#include <algorithm>
#include <cmath>
#include <string>

#include "imgclust/ann/neighbors.hpp"
#include "imgclust/common/errors.hpp"

namespace imgclust::ann {

NeighborList exact_knn(const FeatureMatrix& vectors, std::span<const float> query, std::size_t k,
                       std::optional<std::size_t> exclude_row) {
  if (k == 0) throw ValidationError("k must be at least 1");
  if (query.size() != vectors.dim()) {
    throw ValidationError("query dim " + std::to_string(query.size()) + " does not match index dim " +
                          std::to_string(vectors.dim()));
  }
  std::vector<std::pair<double, std::uint64_t>> all;
  all.reserve(vectors.rows());
  for (std::size_t i = 0; i < vectors.rows(); ++i) {
    if (exclude_row && *exclude_row == i) continue;
    all.emplace_back(squared_distance(query, vectors.row(i)), i);
  }
  const std::size_t take = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end());

  NeighborList out;
  out.query = exclude_row ? *exclude_row : kFreeQuery;
  out.k = k;
  out.neighbors.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.neighbors.push_back({all[i].second, std::sqrt(all[i].first)});
  return out;
}

NeighborList exact_knn(const FeatureMatrix& vectors, std::size_t query_row, std::size_t k) {
  if (k == 0) throw ValidationError("k must be at least 1");
  if (vectors.rows() < 2) throw ValidationError("exact search needs at least 2 vectors");
  if (query_row >= vectors.rows()) throw ValidationError("query row out of range");
  return exact_knn(vectors, vectors.row(query_row), k, query_row);
}

}  // namespace imgclust::ann
