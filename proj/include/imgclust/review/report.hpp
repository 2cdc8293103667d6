#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "imgclust/corpus/corpus.hpp"
#include "imgclust/kmeans/summary.hpp"
#include "imgclust/review/tag_log.hpp"

namespace imgclust::review {

struct ReportTotals {
  std::uint64_t images_responsive = 0;
  std::uint64_t images_not_responsive = 0;
  std::uint64_t images_further_review = 0;
  std::uint64_t images_untagged = 0;
  std::uint64_t images_excluded_prefilter = 0;
  std::uint64_t images_invalid = 0;

  std::uint64_t sum() const {
    return images_responsive + images_not_responsive + images_further_review + images_untagged +
           images_excluded_prefilter + images_invalid;
  }
  bool operator==(const ReportTotals&) const = default;
};

struct ReportRow {
  std::uint32_t cluster_index = 0;
  std::uint64_t size_images = 0;
  Label label = Label::untagged;
  std::string note;
  std::string medoid_image_id;
  std::string medoid_content_hash;  // thumbnail key
};

struct CategorizationReport {
  std::uint32_t round = 0;
  std::uint64_t corpus_images = 0;
  std::vector<ReportRow> rows;  // by cluster index
  ReportTotals totals;
};

// Rolls cluster labels up to image totals. Cluster sizes count every member
// of every dedup group in the cluster; excluded and invalid counts come from
// the manifest. Throws RuntimeFailure if the six totals do not add up to the
// manifest size.
CategorizationReport build_report(std::uint32_t round, std::span<const corpus::ImageRecord> manifest,
                                  std::span<const kmeans::ClusterSummary> summaries,
                                  std::span<const ClusterLabel> labels);

// Same arithmetic from already-aggregated inputs, for callers that have no
// manifest (and for fixtures).
CategorizationReport build_report(std::uint32_t round, std::uint64_t corpus_images,
                                  std::uint64_t excluded_prefilter, std::uint64_t invalid,
                                  std::span<const ReportRow> rows);

// cluster_index,size_images,label,note rows, then a "#TOTALS" block of
// name,value lines.
std::string report_csv(const CategorizationReport& report);
std::string report_json(const CategorizationReport& report);

}  // namespace imgclust::review
