#include "imgclust/review/pipeline.hpp"

#include <algorithm>
#include <iostream>
#include <set>

#include "imgclust/common/errors.hpp"
#include "imgclust/common/parallel.hpp"
#include "imgclust/common/text.hpp"
#include "imgclust/corpus/image_io.hpp"
#include "imgclust/corpus/manifest.hpp"
#include "imgclust/embedding/batch.hpp"
#include "imgclust/embedding/external.hpp"
#include "imgclust/embedding/reference_embedder.hpp"
#include "imgclust/kmeans/kmeans.hpp"
#include "imgclust/kmeans/summary.hpp"

namespace fs = std::filesystem;

namespace imgclust::review {
namespace {

// Carries the stage name out of a failing stage.
struct StageError {
  std::string stage;
  std::string message;
};

std::size_t workers_for(const RoundConfig& c) { return c.workers == 0 ? default_workers() : c.workers; }

void render_thumbnails(const ProjectStore& store, const fs::path& root,
                       std::span<const corpus::ImageRecord> manifest, std::span<const corpus::DedupGroup> groups,
                       std::size_t workers) {
  std::unordered_map<std::string_view, const corpus::ImageRecord*> by_id;
  for (const auto& r : manifest) by_id.emplace(r.image_id, &r);
  parallel_chunks(groups.size(), 16, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t g = begin; g < end; ++g) {
      const auto* rep = by_id.at(groups[g].representative_image_id);
      if (!rep->clusterable()) continue;
      const fs::path out = store.thumbnail_path(rep->content_hash);
      if (fs::exists(out)) continue;
      try {
        const auto jpeg = corpus::render_thumbnail(corpus::load_image(root / rep->path));
        write_file_atomic(out.string(), std::string_view(reinterpret_cast<const char*>(jpeg.data()), jpeg.size()));
      } catch (const std::exception& e) {
        // A missing thumbnail degrades the UI, not the round.
        std::cerr << "thumbnail for " << rep->path << " skipped: " << e.what() << "\n";
      }
    }
  });
}

// Marks every member of a group invalid (its representative could not be
// embedded) so it is still accounted for in report totals.
void invalidate_group(std::vector<corpus::ImageRecord>& manifest, const corpus::DedupGroup& group,
                      const std::unordered_map<std::string, std::size_t>& ordinal_of) {
  for (const auto& id : group.member_ids) {
    auto& r = manifest[ordinal_of.at(id)];
    r.format = std::string(corpus::kInvalidFormat);
    r.excluded = true;
    r.exclusion_reason = corpus::ExclusionReason::invalid;
    r.dedup_group_id.clear();
  }
}

}  // namespace

FeatureMatrix embed_representatives(std::vector<corpus::ImageRecord>& manifest, std::vector<corpus::DedupGroup>& groups,
                                    const fs::path& root, const embedding::EmbedderConfig& config,
                                    std::size_t workers, const fs::path& scratch_dir, std::size_t* failures) {
  config.validate();
  std::unordered_map<std::string, std::size_t> ordinal_of;
  for (std::size_t i = 0; i < manifest.size(); ++i) ordinal_of.emplace(manifest[i].image_id, i);
  std::vector<std::size_t> rep_groups;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto it = ordinal_of.find(groups[g].representative_image_id);
    if (it == ordinal_of.end()) {
      throw ValidationError("group " + groups[g].group_id + " names unknown image " + groups[g].representative_image_id);
    }
    if (manifest[it->second].clusterable()) rep_groups.push_back(g);
  }
  std::sort(rep_groups.begin(), rep_groups.end(), [&](std::size_t a, std::size_t b) {
    return ordinal_of.at(groups[a].representative_image_id) < ordinal_of.at(groups[b].representative_image_id);
  });

  FeatureMatrix vectors(config.dim);
  vectors.reserve(rep_groups.size());
  std::set<std::size_t> failed_groups;
  if (config.backend == embedding::Backend::reference) {
    std::vector<embedding::EmbedItem> items;
    items.reserve(rep_groups.size());
    for (std::size_t g : rep_groups) {
      const auto& rec = manifest[ordinal_of.at(groups[g].representative_image_id)];
      items.push_back({rec.image_id, root / rec.path});
    }
    embedding::ReferenceEmbedder embedder(config.dim, config.normalize);
    auto result = embedding::embed_in_batches(items, embedder, config.batch_size, workers == 0 ? default_workers() : workers);
    std::set<std::string> failed_ids;
    for (const auto& f : result.failed) {
      failed_ids.insert(f.image_id);
      std::cerr << "embedding failed for " << f.image_id << ": " << f.reason << "\n";
    }
    std::size_t next = 0;
    for (std::size_t i = 0; i < rep_groups.size(); ++i) {
      if (failed_ids.count(items[i].image_id)) {
        failed_groups.insert(rep_groups[i]);
        continue;
      }
      vectors.append(ordinal_of.at(items[i].image_id), result.succeeded[next++].values);
    }
  } else {
    std::vector<corpus::ImageRecord> job;
    for (std::size_t g : rep_groups) job.push_back(manifest[ordinal_of.at(groups[g].representative_image_id)]);
    fs::create_directories(scratch_dir);
    const fs::path job_path = scratch_dir / "embed_job.jsonl";
    const fs::path out_path = scratch_dir / "embed_job.fvec";
    corpus::write_manifest(job_path, job);
    const auto out = embedding::run_external_embedder(job_path, out_path, root, config);
    std::vector<std::size_t> row_for_job(job.size());
    for (std::size_t r = 0; r < out.rows(); ++r) row_for_job[out.ordinal(r)] = r;
    for (std::size_t j = 0; j < job.size(); ++j) vectors.append(ordinal_of.at(job[j].image_id), out.row(row_for_job[j]));
    std::error_code ec;
    fs::remove(job_path, ec);
    fs::remove(out_path, ec);
  }
  for (std::size_t g : failed_groups) invalidate_group(manifest, groups[g], ordinal_of);
  if (!failed_groups.empty()) {
    std::vector<corpus::DedupGroup> kept;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (!failed_groups.count(g)) kept.push_back(std::move(groups[g]));
    }
    groups = std::move(kept);
  }
  if (failures) *failures = failed_groups.size();
  return vectors;
}

std::uint32_t begin_round(ProjectStore& store, const std::string& project_id, const RoundConfig& config) {
  config.embedder.validate();
  if (config.k && *config.k == 0) throw ValidationError("k must be at least 1");
  if (config.prefilter) {
    // Checks the criterion itself without touching any records.
    corpus::exclude_high_frequency({}, {}, *config.prefilter);
  }
  if (config.forest.tree_count < 1 || config.forest.leaf_size < 1 || config.forest.checks < 1) {
    throw ValidationError("forest parameters must be positive");
  }
  store.get(project_id);
  RoundInfo draft;
  draft.k = config.k.value_or(0);
  draft.seed = config.seed;
  draft.embedder_backend = std::string(embedding::backend_name(config.embedder.backend));
  draft.dim = config.embedder.dim;
  draft.forest = config.forest;
  draft.forest.seed = config.seed;
  draft.stage = "queued";
  return store.begin_round(project_id, draft);
}

RoundInfo execute_round(ProjectStore& store, const std::string& project_id, std::uint32_t round,
                        const RoundConfig& config, const StageCallback& on_stage) {
  const Project project = store.get(project_id);
  const RoundInfo* existing = project.find_round(round);
  if (!existing) throw NotFoundError("no round " + std::to_string(round));
  RoundData data;
  data.info = *existing;
  RoundInfo& info = data.info;
  const std::size_t workers = workers_for(config);
  const fs::path root = project.corpus_root;
  const fs::path staging = store.staging_dir(project_id, round);

  auto enter = [&](const char* stage) {
    info.stage = stage;
    store.update_round(project_id, info);
    if (on_stage) on_stage(stage);
  };
  auto run_stage = [&](const char* stage, auto&& fn) {
    enter(stage);
    try {
      fn();
    } catch (const std::exception& e) {
      throw StageError{stage, e.what()};
    }
  };

  try {
    std::vector<corpus::DedupGroup> groups;
    corpus::FrequencyTally tally;

    run_stage("ingest", [&] {
      corpus::ScanOptions scan;
      scan.workers = workers;
      data.manifest = corpus::scan_corpus(root, scan);
    });
    run_stage("dedup", [&] {
      groups = corpus::deduplicate(data.manifest);
      tally = corpus::tally_frequencies(groups, data.manifest);
    });
    if (config.prefilter) {
      run_stage("prefilter", [&] {
        data.manifest = corpus::exclude_high_frequency(data.manifest, groups, *config.prefilter);
      });
    }

    std::unordered_map<std::string, std::size_t> ordinal_of;
    for (std::size_t i = 0; i < data.manifest.size(); ++i) ordinal_of.emplace(data.manifest[i].image_id, i);
    // Clusterable representatives in manifest order.
    std::vector<std::size_t> rep_groups;
    std::size_t k = 0;
    enter("validate");
    {
      for (std::size_t g = 0; g < groups.size(); ++g) {
        if (data.manifest[ordinal_of.at(groups[g].representative_image_id)].clusterable()) rep_groups.push_back(g);
      }
      std::sort(rep_groups.begin(), rep_groups.end(), [&](std::size_t a, std::size_t b) {
        return ordinal_of.at(groups[a].representative_image_id) < ordinal_of.at(groups[b].representative_image_id);
      });
      if (rep_groups.empty()) {
        throw ValidationError("corpus has no clusterable images");
      }
      k = kmeans::resolve_cluster_count(config.k, rep_groups.size());
      if (k > rep_groups.size()) {
        throw ValidationError("k=" + std::to_string(k) + " exceeds the " + std::to_string(rep_groups.size()) +
                              " clusterable unique images");
      }
    }

    std::error_code ec;
    fs::remove_all(staging, ec);
    fs::create_directories(staging);

    if (config.thumbnails) {
      run_stage("thumbnails", [&] { render_thumbnails(store, root, data.manifest, groups, workers); });
    }

    std::size_t embed_failures = 0;
    run_stage("embed", [&] {
      data.vectors = embed_representatives(data.manifest, groups, root, config.embedder, workers, staging, &embed_failures);
      if (data.vectors.rows() < k) {
        throw RuntimeFailure("only " + std::to_string(data.vectors.rows()) + " images embedded, fewer than k=" +
                             std::to_string(k));
      }
    });
    info.embed_failures = embed_failures;
    data.groups = std::move(groups);

    run_stage("fit", [&] {
      kmeans::FitOptions fit;
      fit.k = k;
      fit.seed = config.seed;
      fit.max_iters = config.max_iters;
      fit.workers = workers;
      data.model = kmeans::kmeans_fit(data.vectors, fit);
    });
    run_stage("summarize", [&] {
      data.summaries = kmeans::summarize_clusters(data.model, data.vectors, data.manifest, data.groups);
    });

    const auto counts = corpus::count_records(data.manifest);
    info.k = k;
    info.images_total = counts.total;
    info.images_invalid = counts.invalid;
    info.images_excluded_prefilter = counts.excluded_high_frequency;
    info.representatives = data.vectors.rows();
    info.inertia = data.model.inertia;
    info.iterations = data.model.iterations_run;

    run_stage("persist", [&] {
      RoundInfo final_info = info;
      final_info.status = RoundStatus::complete;
      final_info.stage = "done";
      final_info.finished_at = utc_timestamp();
      data.info = final_info;
      write_round_artifacts(staging, data, tally);
      const fs::path target = store.round_dir(project_id, round);
      if (fs::exists(target)) throw RuntimeFailure("round directory " + target.string() + " already exists");
      fs::rename(staging, target);
      store.update_round(project_id, final_info);
    });
    if (on_stage) on_stage("done");
    return data.info;
  } catch (const ValidationError&) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    store.drop_round(project_id, round);
    throw;
  } catch (const StageError& e) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    info.status = RoundStatus::failed;
    info.stage = e.stage;
    info.error = e.message;
    info.finished_at = utc_timestamp();
    store.update_round(project_id, info);
    return info;
  }
}

RoundInfo run_round(ProjectStore& store, const std::string& project_id, const RoundConfig& config,
                    const StageCallback& on_stage) {
  const std::uint32_t round = begin_round(store, project_id, config);
  return execute_round(store, project_id, round, config, on_stage);
}

}  // namespace imgclust::review
