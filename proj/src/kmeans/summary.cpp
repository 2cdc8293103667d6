#include "imgclust/kmeans/summary.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "imgclust/common/errors.hpp"

namespace imgclust::kmeans {

std::vector<std::vector<RankedMember>> rank_members(const ClusterModel& model, const FeatureMatrix& vectors,
                                                    std::span<const corpus::ImageRecord> manifest) {
  if (vectors.dim() != model.dim) throw ValidationError("vectors and model differ in dim");
  std::vector<std::vector<RankedMember>> clusters(model.k);
  for (std::size_t i = 0; i < vectors.rows(); ++i) {
    const std::uint64_t ordinal = vectors.ordinal(i);
    if (ordinal >= manifest.size()) {
      throw ValidationError("ordinal " + std::to_string(ordinal) + " is outside the manifest");
    }
    const auto c = model.cluster_of(ordinal);
    if (!c) continue;
    clusters[*c].push_back({ordinal, std::sqrt(squared_distance(vectors.row(i), model.centroid(*c)))});
  }
  for (auto& members : clusters) {
    std::sort(members.begin(), members.end(), [&](const RankedMember& a, const RankedMember& b) {
      if (a.distance != b.distance) return a.distance < b.distance;
      return manifest[a.ordinal].image_id < manifest[b.ordinal].image_id;
    });
  }
  return clusters;
}

std::vector<ClusterSummary> summarize_clusters(const ClusterModel& model, const FeatureMatrix& vectors,
                                               std::span<const corpus::ImageRecord> manifest,
                                               std::span<const corpus::DedupGroup> groups,
                                               std::size_t sample_size) {
  std::unordered_map<std::string_view, std::size_t> frequency;
  for (const auto& g : groups) frequency.emplace(g.representative_image_id, g.frequency);

  const auto ranked = rank_members(model, vectors, manifest);
  std::vector<ClusterSummary> out(model.k);
  for (std::size_t c = 0; c < model.k; ++c) {
    auto& s = out[c];
    s.cluster_index = static_cast<std::uint32_t>(c);
    s.size_representatives = ranked[c].size();
    for (const auto& m : ranked[c]) {
      const auto& id = manifest[m.ordinal].image_id;
      auto it = frequency.find(id);
      s.size_total_images += it == frequency.end() ? 1 : it->second;
      if (s.sample_image_ids.size() < sample_size) s.sample_image_ids.push_back(id);
    }
    if (!ranked[c].empty()) s.medoid_image_id = manifest[ranked[c].front().ordinal].image_id;
  }
  return out;
}

}  // namespace imgclust::kmeans
