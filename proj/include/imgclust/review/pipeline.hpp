#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "imgclust/ann/kd_forest.hpp"
#include "imgclust/corpus/corpus.hpp"
#include "imgclust/embedding/embedder.hpp"
#include "imgclust/review/project_store.hpp"

namespace imgclust::review {

struct RoundConfig {
  std::optional<std::size_t> k;  // default: 150, clamped to the representative count
  std::uint64_t seed = 0;
  embedding::EmbedderConfig embedder;
  std::optional<corpus::ExclusionCriterion> prefilter;
  ann::ForestParams forest;  // forest.seed is replaced by the round seed
  std::size_t max_iters = 100;
  std::size_t workers = 0;
  bool thumbnails = true;
};

using StageCallback = std::function<void(std::string_view stage)>;

// Embeds the representative of every clusterable group, in manifest order;
// row ordinals are manifest ordinals. A representative that cannot be
// embedded invalidates its whole group in the manifest and the group is
// dropped, so report totals still reconcile. The external backend writes its
// job files under scratch_dir.
FeatureMatrix embed_representatives(std::vector<corpus::ImageRecord>& manifest, std::vector<corpus::DedupGroup>& groups,
                                    const std::filesystem::path& root, const embedding::EmbedderConfig& config,
                                    std::size_t workers, const std::filesystem::path& scratch_dir,
                                    std::size_t* failures = nullptr);

// Validates config and records a new running round. Throws ValidationError
// (nothing recorded) on a bad config, NotFoundError for an unknown project.
std::uint32_t begin_round(ProjectStore& store, const std::string& project_id, const RoundConfig& config);

// Runs ingest, dedup, prefilter, validate, thumbnails, embed, fit, summarize
// and persist for a round created by begin_round. Artifacts are built in a
// staging directory and renamed into place only on success, so earlier
// rounds are never touched.
//
// If there are fewer clusterable representatives than k, the round record
// is removed and ValidationError is thrown. Any other stage failure leaves
// the round marked failed with the stage name and message; the returned
// RoundInfo tells which.
RoundInfo execute_round(ProjectStore& store, const std::string& project_id, std::uint32_t round,
                        const RoundConfig& config, const StageCallback& on_stage = {});

// begin_round + execute_round.
RoundInfo run_round(ProjectStore& store, const std::string& project_id, const RoundConfig& config,
                    const StageCallback& on_stage = {});

}  // namespace imgclust::review
