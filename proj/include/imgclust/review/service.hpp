#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "imgclust/review/pipeline.hpp"
#include "imgclust/review/project_store.hpp"
#include "imgclust/review/report.hpp"
#include "imgclust/review/tag_log.hpp"

namespace imgclust::review {

enum class JobState { queued, running, succeeded, failed };
std::string_view job_state_name(JobState s);

struct JobStatus {
  std::string job_id;
  std::string project_id;
  std::uint32_t round = 0;
  JobState state = JobState::queued;
  std::string stage;
  std::string error_code;  // validation_error | stage_failed | internal
  std::string error;
  std::string created_at;
  std::string finished_at;
};

struct ClusterView {
  kmeans::ClusterSummary summary;
  ClusterLabel label;
};

struct ImageView {
  const corpus::ImageRecord* record = nullptr;
  double distance = 0.0;  // to the cluster centroid, or to the query image
  std::uint32_t cluster_index = 0;
  Label label = Label::untagged;
};

struct ImagePage {
  std::uint32_t cluster_index = 0;
  std::size_t total = 0;
  std::size_t offset = 0;
  std::vector<ImageView> images;
  std::shared_ptr<const RoundData> round;  // keeps `images` alive
};

struct SimilarResult {
  std::string query_image_id;
  std::size_t k = 0;
  std::vector<ImageView> neighbors;
  std::shared_ptr<const RoundData> round;
};

struct RoundStats {
  std::uint32_t round = 0;
  RoundStatus status = RoundStatus::running;
  std::size_t k = 0;
  std::size_t clusters_tagged = 0;
  std::size_t clusters_untagged = 0;
  ReportTotals totals;
  std::uint64_t images_resolved = 0;  // responsive + not responsive
  std::uint64_t images_pending = 0;   // further review + untagged
  std::size_t tag_events = 0;
  std::string first_tag_at;
  std::string last_tag_at;
};

struct ProjectStats {
  std::string project_id;
  std::vector<RoundStats> rounds;
};

// The review workflow over one data directory. Thread-safe: reads run
// concurrently, tag writes are serialized per project, rounds execute one at
// a time on a background worker.
class ReviewService {
 public:
  explicit ReviewService(std::filesystem::path data_dir);
  ~ReviewService();
  ReviewService(const ReviewService&) = delete;
  ReviewService& operator=(const ReviewService&) = delete;

  ProjectStore& store() { return store_; }

  Project create_project(const std::string& name, const std::filesystem::path& corpus_root);
  Project project(const std::string& project_id) const;
  std::vector<Project> projects() const;

  // Validates, records the round as running and queues it. Returns the job.
  JobStatus submit_round(const std::string& project_id, const RoundConfig& config);
  JobStatus job(const std::string& job_id) const;
  // Blocks until the job leaves queued/running.
  JobStatus wait(const std::string& job_id) const;

  // Throws NotFoundError for an unknown project/round and ConflictError if
  // the round is not complete.
  std::shared_ptr<const RoundData> round_data(const std::string& project_id, std::uint32_t round) const;

  std::vector<ClusterView> clusters(const std::string& project_id, std::uint32_t round, bool by_size) const;
  // Cluster members ordered by distance to the centroid, duplicates expanded.
  ImagePage cluster_images(const std::string& project_id, std::uint32_t round, std::uint32_t cluster,
                           std::size_t offset, std::size_t limit) const;

  TagEvent tag_cluster(const std::string& project_id, std::uint32_t round, std::uint32_t cluster,
                       const std::string& label, const std::string& note, const std::string& author);
  std::vector<TagEvent> tag_history(const std::string& project_id, std::uint32_t round,
                                    std::uint32_t cluster) const;

  CategorizationReport report(const std::string& project_id, std::uint32_t round) const;
  SimilarResult similar_images(const std::string& project_id, std::uint32_t round, const std::string& image_id,
                               std::size_t k = 50) const;
  ProjectStats stats(const std::string& project_id) const;

  TagLog& tag_log(const std::string& project_id) const;

 private:
  struct Job {
    JobStatus status;
    RoundConfig config;
  };

  void worker_loop();

  ProjectStore store_;

  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<std::string, std::uint32_t>, std::shared_ptr<const RoundData>> cache_;
  mutable std::map<std::string, std::unique_ptr<TagLog>> tag_logs_;

  mutable std::mutex jobs_mutex_;
  mutable std::condition_variable jobs_cv_;
  std::map<std::string, Job> jobs_;
  std::deque<std::string> queue_;
  std::uint64_t next_job_ = 1;
  bool stopping_ = false;
  std::thread worker_;
};

}  // namespace imgclust::review
