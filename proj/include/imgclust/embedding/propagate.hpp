#pragma once

#include <memory>
#include <span>
#include <string>
#include <unordered_map>

#include "imgclust/corpus/corpus.hpp"
#include "imgclust/embedding/embedder.hpp"

namespace imgclust::embedding {

// Per-image view onto representative vectors. Members of one dedup group share
// a single FeatureVector instance.
class VectorMapping {
 public:
  const FeatureVector* find(const std::string& image_id) const {
    auto it = by_image_.find(image_id);
    return it == by_image_.end() ? nullptr : it->second.get();
  }
  std::size_t size() const { return by_image_.size(); }
  const auto& entries() const { return by_image_; }

 private:
  friend VectorMapping propagate_vectors(std::span<const corpus::DedupGroup>,
                                         std::span<const corpus::ImageRecord>,
                                         std::span<const FeatureVector>);
  std::unordered_map<std::string, std::shared_ptr<const FeatureVector>> by_image_;
};

// Maps every member of each non-excluded group to its representative's vector.
// Excluded and invalid images get no entry. Throws ValidationError listing the
// group ids whose representative has no vector.
VectorMapping propagate_vectors(std::span<const corpus::DedupGroup> groups,
                                std::span<const corpus::ImageRecord> records,
                                std::span<const FeatureVector> representative_vectors);

}  // namespace imgclust::embedding
