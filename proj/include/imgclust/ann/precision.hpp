#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "imgclust/ann/neighbors.hpp"

namespace imgclust::ann {

inline constexpr std::size_t kDefaultPrecisionK = 50;

struct PrecisionReport {
  std::size_t k = 0;
  std::size_t points = 0;
  std::size_t queries = 0;
  // precision[r-1]: mean over queries of |approx top-r ∩ exact top-r| / r.
  std::vector<double> precision;
  double build_seconds = 0.0;
  double exact_seconds = 0.0;
  double approx_seconds = 0.0;
  std::uint64_t similarity_matrix_bytes = 0;
  std::uint64_t index_bytes = 0;

  // Mean of precision over ranks [first, last], 1-based inclusive.
  double mean_precision(std::size_t first, std::size_t last) const;
};

// Compares `index` against exact_knn for `query_sample` rows drawn without
// replacement using `seed` (all rows if the sample covers the set).
PrecisionReport precision_at_k(const FeatureMatrix& vectors, const NeighborIndex& index,
                               std::size_t k = kDefaultPrecisionK, std::size_t query_sample = 100,
                               std::uint64_t seed = 0, double build_seconds = 0.0);

// "rank,precision" rows preceded by '#' comment lines with timings and sizes.
std::string precision_csv(const PrecisionReport& report);

}  // namespace imgclust::ann
