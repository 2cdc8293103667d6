#include "imgclust/common/feature_matrix.hpp"

#include <string>

#include "imgclust/common/errors.hpp"

namespace imgclust {

void FeatureMatrix::append(std::uint64_t ordinal, std::span<const float> values) {
  if (values.size() != dim_) {
    throw ValidationError("vector for ordinal " + std::to_string(ordinal) +
                          " has dim " + std::to_string(values.size()) +
                          ", expected " + std::to_string(dim_));
  }
  ordinals_.push_back(ordinal);
  values_.insert(values_.end(), values.begin(), values.end());
}

double squared_distance(std::span<const float> a, std::span<const float> b) {
  const std::size_t n = a.size();
  const float* pa = a.data();
  const float* pb = b.data();
  // Four independent accumulators; summation order is fixed.
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double d0 = double(pa[i]) - double(pb[i]);
    const double d1 = double(pa[i + 1]) - double(pb[i + 1]);
    const double d2 = double(pa[i + 2]) - double(pb[i + 2]);
    const double d3 = double(pa[i + 3]) - double(pb[i + 3]);
    s0 += d0 * d0;
    s1 += d1 * d1;
    s2 += d2 * d2;
    s3 += d3 * d3;
  }
  for (; i < n; ++i) {
    const double d = double(pa[i]) - double(pb[i]);
    s0 += d * d;
  }
  return (s0 + s1) + (s2 + s3);
}

}  // namespace imgclust
