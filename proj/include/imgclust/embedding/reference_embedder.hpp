#pragma once

#include "imgclust/embedding/embedder.hpp"

namespace imgclust::embedding {

inline constexpr int kReferenceGrid = 16;
inline constexpr int kFeaturesPerBlock = 7;  // mean R, G, B + 4 orientation bins

// Deterministic stand-in for a pretrained network's dense features.
//
// The raster is partitioned into grid x grid blocks. Each block contributes
// its mean R, G, B (scaled to [0, 1]) and a 4-bin histogram of gradient
// orientation (0, 45, 90, 135 degrees) weighted by gradient magnitude and
// averaged over the block's pixels. Gradients use forward differences that
// stay inside the block, so a pixel only influences the blocks that contain
// it. The grid*grid*7 base features are tiled or truncated to `dim`.
//
// Throws ValidationError for an empty raster or a dim not divisible by 8;
// `image_id` is used in the message.
FeatureVector embed_reference(const corpus::Raster& raster, std::size_t dim,
                              std::string image_id = {}, int grid = kReferenceGrid);

// Half-open pixel range [begin, end) covered by block `index` along an axis of
// `extent` pixels split into `grid` blocks. Never empty.
std::pair<int, int> block_range(int index, int extent, int grid);

class ReferenceEmbedder final : public Embedder {
 public:
  explicit ReferenceEmbedder(std::size_t dim = kDefaultDim,
                             Normalization normalize = Normalization::none);

  std::vector<FeatureVector> embed(std::span<const EmbedItem> batch) override;

 private:
  std::size_t dim_;
  Normalization normalize_;
};

}  // namespace imgclust::embedding
