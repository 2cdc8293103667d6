#include "imgclust/embedding/reference_embedder.hpp"

#include <cmath>
#include <numbers>

#include "imgclust/common/errors.hpp"

namespace imgclust::embedding {

std::pair<int, int> block_range(int index, int extent, int grid) {
  const int begin = static_cast<int>(static_cast<long long>(index) * extent / grid);
  int end = static_cast<int>(static_cast<long long>(index + 1) * extent / grid);
  if (end <= begin) end = begin + 1;
  return {begin, end};
}

namespace {

double luma(const corpus::Raster& r, int x, int y) {
  const std::uint8_t* p = r.at(x, y);
  return (0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]) / 255.0;
}

void block_features(const corpus::Raster& r, int x0, int x1, int y0, int y1, float* out) {
  double sum_rgb[3] = {0.0, 0.0, 0.0};
  double bins[4] = {0.0, 0.0, 0.0, 0.0};
  constexpr double kBinWidth = std::numbers::pi / 4.0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const std::uint8_t* p = r.at(x, y);
      sum_rgb[0] += p[0];
      sum_rgb[1] += p[1];
      sum_rgb[2] += p[2];
      const double here = luma(r, x, y);
      const double gx = x + 1 < x1 ? luma(r, x + 1, y) - here : 0.0;
      const double gy = y + 1 < y1 ? luma(r, x, y + 1) - here : 0.0;
      const double magnitude = std::sqrt(gx * gx + gy * gy);
      if (magnitude <= 0.0) continue;
      double angle = std::atan2(gy, gx);
      if (angle < 0.0) angle += std::numbers::pi;
      if (angle >= std::numbers::pi) angle -= std::numbers::pi;
      const int bin = static_cast<int>(std::lround(angle / kBinWidth)) % 4;
      bins[bin] += magnitude;
    }
  }
  const double count = static_cast<double>(x1 - x0) * (y1 - y0);
  for (int c = 0; c < 3; ++c) out[c] = static_cast<float>(sum_rgb[c] / (255.0 * count));
  for (int b = 0; b < 4; ++b) out[3 + b] = static_cast<float>(bins[b] / count);
}

}  // namespace

FeatureVector embed_reference(const corpus::Raster& raster, std::size_t dim, std::string image_id,
                              int grid) {
  const std::string who = image_id.empty() ? std::string("<unnamed>") : image_id;
  if (raster.empty() ||
      raster.rgb.size() != static_cast<std::size_t>(raster.width) * raster.height * 3) {
    throw ValidationError("image " + who + ": raster is empty or undecodable");
  }
  if (dim == 0 || dim % 8 != 0) {
    throw ValidationError("image " + who + ": dim must be a positive multiple of 8");
  }
  if (grid < 1) throw ValidationError("grid must be positive");

  std::vector<float> base(static_cast<std::size_t>(grid) * grid * kFeaturesPerBlock);
  for (int by = 0; by < grid; ++by) {
    const auto [y0, y1] = block_range(by, raster.height, grid);
    for (int bx = 0; bx < grid; ++bx) {
      const auto [x0, x1] = block_range(bx, raster.width, grid);
      block_features(raster, x0, x1, y0, y1,
                     base.data() + (static_cast<std::size_t>(by) * grid + bx) * kFeaturesPerBlock);
    }
  }

  FeatureVector fv;
  fv.image_id = std::move(image_id);
  fv.values.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) fv.values[i] = base[i % base.size()];
  return fv;
}

ReferenceEmbedder::ReferenceEmbedder(std::size_t dim, Normalization normalize)
    : dim_(dim), normalize_(normalize) {
  if (dim_ == 0 || dim_ % 8 != 0) throw ValidationError("reference embedder needs dim divisible by 8");
}

std::vector<FeatureVector> ReferenceEmbedder::embed(std::span<const EmbedItem> batch) {
  std::vector<FeatureVector> out;
  out.reserve(batch.size());
  for (const auto& item : batch) {
    corpus::Raster raster;
    try {
      raster = corpus::load_image(item.path);
    } catch (const std::exception& e) {
      throw BatchFailure("image " + item.image_id + ": " + e.what());
    }
    out.push_back(embed_reference(raster, dim_, item.image_id));
    if (normalize_ == Normalization::l2) l2_normalize(out.back().values);
  }
  return out;
}

}  // namespace imgclust::embedding
