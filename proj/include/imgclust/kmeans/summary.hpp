#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "imgclust/common/feature_matrix.hpp"
#include "imgclust/corpus/corpus.hpp"
#include "imgclust/kmeans/kmeans.hpp"

namespace imgclust::kmeans {

inline constexpr std::size_t kDefaultSampleSize = 25;

struct RankedMember {
  std::uint64_t ordinal;  // manifest ordinal of the representative
  double distance;        // Euclidean distance to the cluster centroid
};

struct ClusterSummary {
  std::uint32_t cluster_index = 0;
  std::size_t size_representatives = 0;
  std::size_t size_total_images = 0;  // expanded through dedup groups
  std::string medoid_image_id;        // empty only for an empty cluster
  std::vector<std::string> sample_image_ids;

  bool operator==(const ClusterSummary&) const = default;
};

// Members of every cluster ordered by distance to the centroid, image id as
// tiebreaker. `vectors` holds the representatives' rows (any order) and
// `manifest[ordinal]` is the record for an ordinal.
std::vector<std::vector<RankedMember>> rank_members(const ClusterModel& model, const FeatureMatrix& vectors,
                                                    std::span<const corpus::ImageRecord> manifest);

std::vector<ClusterSummary> summarize_clusters(const ClusterModel& model, const FeatureMatrix& vectors,
                                               std::span<const corpus::ImageRecord> manifest,
                                               std::span<const corpus::DedupGroup> groups,
                                               std::size_t sample_size = kDefaultSampleSize);

}  // namespace imgclust::kmeans
