#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "imgclust/ann/kd_forest.hpp"
#include "imgclust/common/feature_matrix.hpp"
#include "imgclust/corpus/corpus.hpp"
#include "imgclust/kmeans/kmeans.hpp"
#include "imgclust/kmeans/summary.hpp"

namespace imgclust::review {

enum class RoundStatus { running, complete, failed };

std::string_view round_status_name(RoundStatus s);
RoundStatus parse_round_status(std::string_view name);

struct RoundInfo {
  std::uint32_t round = 0;
  RoundStatus status = RoundStatus::running;
  std::size_t k = 0;  // requested (0 = default) until complete, then the fitted k
  std::uint64_t seed = 0;
  std::string created_at;
  std::string finished_at;
  std::string stage;  // last stage entered; the failing stage for failed rounds
  std::string error;
  std::string embedder_backend;
  std::size_t dim = 0;
  std::size_t images_total = 0;
  std::size_t images_invalid = 0;
  std::size_t images_excluded_prefilter = 0;
  std::size_t representatives = 0;  // embedded dedup groups
  std::size_t embed_failures = 0;   // groups dropped as invalid at embedding time
  double inertia = 0.0;
  std::size_t iterations = 0;
  ann::ForestParams forest;

  bool operator==(const RoundInfo&) const = default;
};

struct Project {
  std::string project_id;
  std::string name;
  std::string corpus_root;
  std::string created_at;
  std::vector<RoundInfo> rounds;

  const RoundInfo* find_round(std::uint32_t round) const;
  // Highest-numbered complete round, if any.
  const RoundInfo* current_round() const;
  bool operator==(const Project&) const = default;
};

std::string project_json(const Project& p);
Project parse_project_json(const std::string& text);

// Stable id for a project name.
std::string project_id_for_name(std::string_view name);

// Directory layout under the data dir:
//   projects/<id>/project.json
//   projects/<id>/tags.log
//   projects/<id>/rounds/<n>/{manifest.jsonl,groups.jsonl,tally.csv,vectors.fvec,
//                             model.kmeans,summaries.json,round.json}
//   thumbnails/<content_hash>.jpg
// project.json is rewritten atomically on every change; round directories
// appear by rename once complete and are never modified afterwards.
class ProjectStore {
 public:
  explicit ProjectStore(std::filesystem::path data_dir);

  // Throws ConflictError for a duplicate name, ValidationError for an empty
  // name or a corpus root that is missing or unreadable.
  Project create_project(const std::string& name, const std::filesystem::path& corpus_root);
  // Throws NotFoundError.
  Project get(const std::string& project_id) const;
  std::vector<Project> list() const;

  // Records a new running round and returns its number.
  std::uint32_t begin_round(const std::string& project_id, RoundInfo draft);
  void update_round(const std::string& project_id, const RoundInfo& info);
  // Removes a round record that never produced artifacts.
  void drop_round(const std::string& project_id, std::uint32_t round);

  const std::filesystem::path& data_dir() const { return data_dir_; }
  std::filesystem::path project_dir(const std::string& project_id) const;
  std::filesystem::path round_dir(const std::string& project_id, std::uint32_t round) const;
  std::filesystem::path staging_dir(const std::string& project_id, std::uint32_t round) const;
  std::filesystem::path tag_log_path(const std::string& project_id) const;
  std::filesystem::path thumbnails_dir() const;
  // Throws ValidationError unless `content_hash` is lowercase hex.
  std::filesystem::path thumbnail_path(const std::string& content_hash) const;

 private:
  void save(const Project& p) const;

  std::filesystem::path data_dir_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, Project> projects_;
};

// Everything a finished round needs to answer queries. Immutable once
// loaded, except for the lazily built similarity index.
struct RoundData {
  RoundInfo info;
  std::vector<corpus::ImageRecord> manifest;
  std::vector<corpus::DedupGroup> groups;
  FeatureMatrix vectors;  // one row per representative, manifest ordinals
  kmeans::ClusterModel model;
  std::vector<kmeans::ClusterSummary> summaries;

  // Derived lookups.
  std::unordered_map<std::string, std::size_t> ordinal_of;     // image id -> manifest ordinal
  std::unordered_map<std::string, std::size_t> group_index_of;  // dedup group id -> groups index
  std::unordered_map<std::uint64_t, std::size_t> row_of;        // manifest ordinal -> vectors row
  std::vector<std::vector<kmeans::RankedMember>> ranked;        // per cluster

  void index_lookups();
  // Row of the representative for an image, if it was embedded.
  std::optional<std::size_t> vector_row_for(const std::string& image_id) const;
  const ann::KdForest& forest() const;

 private:
  mutable std::once_flag forest_once_;
  mutable std::unique_ptr<ann::KdForest> forest_;
};

void write_round_artifacts(const std::filesystem::path& dir, const RoundData& data,
                           std::span<const corpus::TallyRow> tally);
std::shared_ptr<RoundData> load_round_artifacts(const std::filesystem::path& dir);

std::string summaries_json(std::span<const kmeans::ClusterSummary> summaries);
std::vector<kmeans::ClusterSummary> parse_summaries_json(const std::string& text);

std::string round_info_json(const RoundInfo& info);
RoundInfo parse_round_info_json(const std::string& text);

}  // namespace imgclust::review
