#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace imgclust {

// Row-major float32 matrix of feature vectors. Each row carries a stable
// ordinal (its position in the manifest that produced it).
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t rows() const { return ordinals_.size(); }
  bool empty() const { return ordinals_.empty(); }

  std::span<const float> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<float> row(std::size_t i) {
    return {values_.data() + i * dim_, dim_};
  }
  std::uint64_t ordinal(std::size_t i) const { return ordinals_[i]; }
  const std::vector<std::uint64_t>& ordinals() const { return ordinals_; }
  const std::vector<float>& values() const { return values_; }

  void reserve(std::size_t rows) {
    ordinals_.reserve(rows);
    values_.reserve(rows * dim_);
  }
  // Throws ValidationError when values.size() != dim().
  void append(std::uint64_t ordinal, std::span<const float> values);

 private:
  std::size_t dim_ = 0;
  std::vector<std::uint64_t> ordinals_;
  std::vector<float> values_;
};

// Squared Euclidean distance with float64 accumulation.
double squared_distance(std::span<const float> a, std::span<const float> b);

}  // namespace imgclust
