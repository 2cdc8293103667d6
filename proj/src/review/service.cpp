#include "imgclust/review/service.hpp"

#include <algorithm>
#include <iostream>

#include "imgclust/common/errors.hpp"
#include "imgclust/common/text.hpp"

namespace fs = std::filesystem;

namespace imgclust::review {

std::string_view job_state_name(JobState s) {
  switch (s) {
    case JobState::queued: return "queued";
    case JobState::running: return "running";
    case JobState::succeeded: return "succeeded";
    case JobState::failed: return "failed";
  }
  return "failed";
}

ReviewService::ReviewService(fs::path data_dir) : store_(std::move(data_dir)) {
  worker_ = std::thread([this] { worker_loop(); });
}

ReviewService::~ReviewService() {
  {
    std::lock_guard lock(jobs_mutex_);
    stopping_ = true;
  }
  jobs_cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

Project ReviewService::create_project(const std::string& name, const fs::path& corpus_root) {
  return store_.create_project(name, corpus_root);
}

Project ReviewService::project(const std::string& project_id) const { return store_.get(project_id); }

std::vector<Project> ReviewService::projects() const { return store_.list(); }

JobStatus ReviewService::submit_round(const std::string& project_id, const RoundConfig& config) {
  const std::uint32_t round = begin_round(store_, project_id, config);
  std::lock_guard lock(jobs_mutex_);
  Job job;
  job.status.job_id = "job-" + std::to_string(next_job_++);
  job.status.project_id = project_id;
  job.status.round = round;
  job.status.created_at = utc_timestamp();
  job.status.stage = "queued";
  job.config = config;
  const JobStatus status = job.status;
  jobs_.emplace(status.job_id, std::move(job));
  queue_.push_back(status.job_id);
  jobs_cv_.notify_all();
  return status;
}

JobStatus ReviewService::job(const std::string& job_id) const {
  std::lock_guard lock(jobs_mutex_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw NotFoundError("no job '" + job_id + "'");
  return it->second.status;
}

JobStatus ReviewService::wait(const std::string& job_id) const {
  std::unique_lock lock(jobs_mutex_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw NotFoundError("no job '" + job_id + "'");
  jobs_cv_.wait(lock, [&] {
    return it->second.status.state == JobState::succeeded || it->second.status.state == JobState::failed;
  });
  return it->second.status;
}

void ReviewService::worker_loop() {
  for (;;) {
    std::string id;
    RoundConfig config;
    JobStatus status;
    {
      std::unique_lock lock(jobs_mutex_);
      jobs_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      id = queue_.front();
      queue_.pop_front();
      Job& job = jobs_.at(id);
      job.status.state = JobState::running;
      config = job.config;
      status = job.status;
    }
    auto set = [&](auto&& fn) {
      {
        std::lock_guard lock(jobs_mutex_);
        fn(jobs_.at(id).status);
      }
      jobs_cv_.notify_all();
    };
    try {
      const RoundInfo info = execute_round(store_, status.project_id, status.round, config,
                                           [&](std::string_view stage) {
                                             set([&](JobStatus& s) { s.stage = std::string(stage); });
                                           });
      set([&](JobStatus& s) {
        s.finished_at = utc_timestamp();
        if (info.status == RoundStatus::complete) {
          s.state = JobState::succeeded;
        } else {
          s.state = JobState::failed;
          s.error_code = "stage_failed";
          s.stage = info.stage;
          s.error = info.error;
        }
      });
    } catch (const ValidationError& e) {
      set([&](JobStatus& s) {
        s.state = JobState::failed;
        s.error_code = "validation_error";
        s.error = e.what();
        s.finished_at = utc_timestamp();
      });
    } catch (const std::exception& e) {
      std::cerr << "round job " << id << " failed: " << e.what() << "\n";
      set([&](JobStatus& s) {
        s.state = JobState::failed;
        s.error_code = "internal";
        s.error = e.what();
        s.finished_at = utc_timestamp();
      });
    }
  }
}

std::shared_ptr<const RoundData> ReviewService::round_data(const std::string& project_id,
                                                           std::uint32_t round) const {
  const Project p = store_.get(project_id);
  const RoundInfo* info = p.find_round(round);
  if (!info) throw NotFoundError("project " + project_id + " has no round " + std::to_string(round));
  if (info->status != RoundStatus::complete) {
    throw ConflictError("round " + std::to_string(round) + " is " + std::string(round_status_name(info->status)));
  }
  const auto key = std::make_pair(project_id, round);
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  // Loading can take a while; do it outside the lock. A racing loader just
  // produces an identical copy.
  std::shared_ptr<const RoundData> data = load_round_artifacts(store_.round_dir(project_id, round));
  std::lock_guard lock(cache_mutex_);
  return cache_.emplace(key, std::move(data)).first->second;
}

TagLog& ReviewService::tag_log(const std::string& project_id) const {
  store_.get(project_id);
  std::lock_guard lock(cache_mutex_);
  auto& slot = tag_logs_[project_id];
  if (!slot) slot = std::make_unique<TagLog>(store_.tag_log_path(project_id));
  return *slot;
}

std::vector<ClusterView> ReviewService::clusters(const std::string& project_id, std::uint32_t round,
                                                 bool by_size) const {
  const auto data = round_data(project_id, round);
  const auto labels = tag_log(project_id).round_labels(round, data->model.k);
  std::vector<ClusterView> out;
  out.reserve(data->summaries.size());
  for (const auto& s : data->summaries) out.push_back({s, labels[s.cluster_index]});
  if (by_size) {
    std::stable_sort(out.begin(), out.end(), [](const ClusterView& a, const ClusterView& b) {
      return a.summary.size_total_images > b.summary.size_total_images;
    });
  }
  return out;
}

namespace {

void check_cluster(const RoundData& data, std::uint32_t cluster) {
  if (cluster >= data.model.k) {
    throw NotFoundError("cluster " + std::to_string(cluster) + " does not exist (k=" +
                        std::to_string(data.model.k) + ")");
  }
}

// Members of the dedup group whose representative has manifest ordinal `rep`.
const std::vector<std::string>& group_members(const RoundData& data, std::uint64_t rep) {
  const auto& rec = data.manifest[rep];
  return data.groups[data.group_index_of.at(rec.dedup_group_id)].member_ids;
}

}  // namespace

ImagePage ReviewService::cluster_images(const std::string& project_id, std::uint32_t round, std::uint32_t cluster,
                                        std::size_t offset, std::size_t limit) const {
  const auto data = round_data(project_id, round);
  check_cluster(*data, cluster);
  const Label label = tag_log(project_id).current(round, cluster).label;
  ImagePage page;
  page.cluster_index = cluster;
  page.offset = offset;
  page.round = data;
  std::size_t position = 0;
  for (const auto& member : data->ranked[cluster]) {
    const auto& ids = group_members(*data, member.ordinal);
    for (const auto& id : ids) {
      if (position >= offset && page.images.size() < limit) {
        page.images.push_back({&data->manifest[data->ordinal_of.at(id)], member.distance, cluster, label});
      }
      ++position;
    }
  }
  page.total = position;
  return page;
}

TagEvent ReviewService::tag_cluster(const std::string& project_id, std::uint32_t round, std::uint32_t cluster,
                                    const std::string& label, const std::string& note, const std::string& author) {
  const Label parsed = parse_assignable_label(label);
  const auto data = round_data(project_id, round);
  check_cluster(*data, cluster);
  return tag_log(project_id).append(round, cluster, parsed, note, author);
}

std::vector<TagEvent> ReviewService::tag_history(const std::string& project_id, std::uint32_t round,
                                                 std::uint32_t cluster) const {
  const auto data = round_data(project_id, round);
  check_cluster(*data, cluster);
  return tag_log(project_id).history(round, cluster);
}

CategorizationReport ReviewService::report(const std::string& project_id, std::uint32_t round) const {
  const auto data = round_data(project_id, round);
  const auto labels = tag_log(project_id).round_labels(round, data->model.k);
  return build_report(round, data->manifest, data->summaries, labels);
}

SimilarResult ReviewService::similar_images(const std::string& project_id, std::uint32_t round,
                                            const std::string& image_id, std::size_t k) const {
  if (k == 0) throw ValidationError("k must be at least 1");
  const auto data = round_data(project_id, round);
  auto rec = data->ordinal_of.find(image_id);
  if (rec == data->ordinal_of.end()) throw NotFoundError("no image '" + image_id + "' in round " + std::to_string(round));
  const auto row = data->vector_row_for(image_id);
  if (!row) {
    throw NotFoundError("image '" + image_id + "' was not embedded in round " + std::to_string(round) +
                        " (excluded or invalid)");
  }
  const auto labels = tag_log(project_id).round_labels(round, data->model.k);

  SimilarResult result;
  result.query_image_id = image_id;
  result.k = k;
  result.round = data;
  auto add_group = [&](std::uint64_t rep_ordinal, double distance) {
    const auto cluster = *data->model.cluster_of(rep_ordinal);
    for (const auto& id : group_members(*data, rep_ordinal)) {
      if (result.neighbors.size() >= k) return;
      if (id == image_id) continue;
      result.neighbors.push_back({&data->manifest[data->ordinal_of.at(id)], distance, cluster,
                                  labels[cluster].label});
    }
  };

  // Byte-identical siblings first, then neighboring representatives. Every
  // representative expands to at least one image, so k of them suffice.
  add_group(data->vectors.ordinal(*row), 0.0);
  if (data->vectors.rows() > 1 && result.neighbors.size() < k) {
    const auto nn = data->forest().query(data->vectors, data->vectors.row(*row), k, *row);
    for (const auto& n : nn.neighbors) add_group(data->vectors.ordinal(n.index), n.distance);
  }
  return result;
}

ProjectStats ReviewService::stats(const std::string& project_id) const {
  const Project p = store_.get(project_id);
  const auto events = tag_log(project_id).events();
  ProjectStats out;
  out.project_id = project_id;
  for (const auto& info : p.rounds) {
    RoundStats rs;
    rs.round = info.round;
    rs.status = info.status;
    rs.k = info.k;
    for (const auto& e : events) {
      if (e.round != info.round) continue;
      ++rs.tag_events;
      if (rs.first_tag_at.empty()) rs.first_tag_at = e.timestamp;
      rs.last_tag_at = e.timestamp;
    }
    if (info.status == RoundStatus::complete) {
      const auto rep = report(project_id, info.round);
      rs.totals = rep.totals;
      for (const auto& row : rep.rows) {
        if (row.label == Label::untagged) {
          ++rs.clusters_untagged;
        } else {
          ++rs.clusters_tagged;
        }
      }
      rs.images_resolved = rep.totals.images_responsive + rep.totals.images_not_responsive;
      rs.images_pending = rep.totals.images_further_review + rep.totals.images_untagged;
    }
    out.rounds.push_back(std::move(rs));
  }
  return out;
}

}  // namespace imgclust::review
