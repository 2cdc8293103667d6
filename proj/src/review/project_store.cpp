#include "imgclust/review/project_store.hpp"

#include <algorithm>
#include <json.hpp>

#include "imgclust/common/errors.hpp"
#include "imgclust/common/text.hpp"
#include "imgclust/corpus/content_hash.hpp"
#include "imgclust/corpus/manifest.hpp"
#include "imgclust/embedding/vectors_file.hpp"
#include "imgclust/kmeans/model_file.hpp"
#include "imgclust/review/labels.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace imgclust::review {

std::string_view round_status_name(RoundStatus s) {
  switch (s) {
    case RoundStatus::running: return "running";
    case RoundStatus::complete: return "complete";
    case RoundStatus::failed: return "failed";
  }
  return "failed";
}

RoundStatus parse_round_status(std::string_view name) {
  for (RoundStatus s : {RoundStatus::running, RoundStatus::complete, RoundStatus::failed}) {
    if (round_status_name(s) == name) return s;
  }
  throw ValidationError("unknown round status '" + std::string(name) + "'");
}

namespace {

ordered_json round_to_json(const RoundInfo& r) {
  ordered_json j;
  j["round"] = r.round;
  j["status"] = std::string(round_status_name(r.status));
  j["k"] = r.k;
  j["seed"] = r.seed;
  j["created_at"] = r.created_at;
  j["finished_at"] = r.finished_at;
  j["stage"] = r.stage;
  j["error"] = r.error;
  j["embedder_backend"] = r.embedder_backend;
  j["dim"] = r.dim;
  j["images_total"] = r.images_total;
  j["images_invalid"] = r.images_invalid;
  j["images_excluded_prefilter"] = r.images_excluded_prefilter;
  j["representatives"] = r.representatives;
  j["embed_failures"] = r.embed_failures;
  j["inertia"] = r.inertia;
  j["iterations"] = r.iterations;
  j["forest"] = {{"tree_count", r.forest.tree_count},
                 {"leaf_size", r.forest.leaf_size},
                 {"checks", r.forest.checks},
                 {"seed", r.forest.seed}};
  return j;
}

RoundInfo round_from_json(const ordered_json& j) {
  RoundInfo r;
  r.round = j.at("round").get<std::uint32_t>();
  r.status = parse_round_status(j.at("status").get<std::string>());
  r.k = j.at("k").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.created_at = j.at("created_at").get<std::string>();
  r.finished_at = j.at("finished_at").get<std::string>();
  r.stage = j.at("stage").get<std::string>();
  r.error = j.at("error").get<std::string>();
  r.embedder_backend = j.at("embedder_backend").get<std::string>();
  r.dim = j.at("dim").get<std::size_t>();
  r.images_total = j.at("images_total").get<std::size_t>();
  r.images_invalid = j.at("images_invalid").get<std::size_t>();
  r.images_excluded_prefilter = j.at("images_excluded_prefilter").get<std::size_t>();
  r.representatives = j.at("representatives").get<std::size_t>();
  r.embed_failures = j.at("embed_failures").get<std::size_t>();
  r.inertia = j.at("inertia").get<double>();
  r.iterations = j.at("iterations").get<std::size_t>();
  const auto& f = j.at("forest");
  r.forest.tree_count = f.at("tree_count").get<std::size_t>();
  r.forest.leaf_size = f.at("leaf_size").get<std::size_t>();
  r.forest.checks = f.at("checks").get<std::size_t>();
  r.forest.seed = f.at("seed").get<std::uint64_t>();
  return r;
}

template <typename Fn>
auto parse_json_or_fail(const std::string& what, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw RuntimeFailure("corrupt " + what + ": " + e.what());
  }
}

}  // namespace

std::string round_info_json(const RoundInfo& info) { return round_to_json(info).dump(2); }

RoundInfo parse_round_info_json(const std::string& text) {
  return parse_json_or_fail("round record", [&] { return round_from_json(ordered_json::parse(text)); });
}

const RoundInfo* Project::find_round(std::uint32_t round) const {
  for (const auto& r : rounds) {
    if (r.round == round) return &r;
  }
  return nullptr;
}

const RoundInfo* Project::current_round() const {
  const RoundInfo* best = nullptr;
  for (const auto& r : rounds) {
    if (r.status == RoundStatus::complete && (!best || r.round > best->round)) best = &r;
  }
  return best;
}

std::string project_json(const Project& p) {
  ordered_json j;
  j["project_id"] = p.project_id;
  j["name"] = p.name;
  j["corpus_root"] = p.corpus_root;
  j["created_at"] = p.created_at;
  const RoundInfo* cur = p.current_round();
  j["current_round"] = cur ? ordered_json(cur->round) : ordered_json(nullptr);
  ordered_json rounds = ordered_json::array();
  for (const auto& r : p.rounds) rounds.push_back(round_to_json(r));
  j["rounds"] = rounds;
  return j.dump(2);
}

Project parse_project_json(const std::string& text) {
  return parse_json_or_fail("project record", [&] {
    const auto j = ordered_json::parse(text);
    Project p;
    p.project_id = j.at("project_id").get<std::string>();
    p.name = j.at("name").get<std::string>();
    p.corpus_root = j.at("corpus_root").get<std::string>();
    p.created_at = j.at("created_at").get<std::string>();
    for (const auto& r : j.at("rounds")) p.rounds.push_back(round_from_json(r));
    return p;
  });
}

std::string project_id_for_name(std::string_view name) {
  return corpus::hash_string(name, corpus::HashAlgorithm::sha256).substr(0, 12);
}

ProjectStore::ProjectStore(fs::path data_dir) : data_dir_(std::move(data_dir)) {
  std::error_code ec;
  fs::create_directories(data_dir_ / "projects", ec);
  if (ec) throw RuntimeFailure("cannot create data directory " + data_dir_.string() + ": " + ec.message());
  fs::create_directories(thumbnails_dir(), ec);
  for (const auto& entry : fs::directory_iterator(data_dir_ / "projects")) {
    const fs::path file = entry.path() / "project.json";
    if (!fs::exists(file)) continue;
    Project p = parse_project_json(read_file(file.string()));
    bool interrupted = false;
    for (auto& r : p.rounds) {
      if (r.status == RoundStatus::running) {
        // The process that owned this round is gone.
        r.status = RoundStatus::failed;
        r.error = "interrupted before completion";
        interrupted = true;
      }
    }
    if (interrupted) save(p);
    projects_.emplace(p.project_id, std::move(p));
  }
}

fs::path ProjectStore::project_dir(const std::string& id) const { return data_dir_ / "projects" / id; }

fs::path ProjectStore::round_dir(const std::string& id, std::uint32_t round) const {
  return project_dir(id) / "rounds" / std::to_string(round);
}

fs::path ProjectStore::staging_dir(const std::string& id, std::uint32_t round) const {
  return project_dir(id) / "rounds" / (".staging-" + std::to_string(round));
}

fs::path ProjectStore::tag_log_path(const std::string& id) const { return project_dir(id) / "tags.log"; }

fs::path ProjectStore::thumbnails_dir() const { return data_dir_ / "thumbnails"; }

fs::path ProjectStore::thumbnail_path(const std::string& content_hash) const {
  const bool hex = !content_hash.empty() && content_hash.size() <= 128 &&
                   std::all_of(content_hash.begin(), content_hash.end(), [](char c) {
                     return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
                   });
  if (!hex) throw ValidationError("not a content hash: '" + content_hash + "'");
  return thumbnails_dir() / (content_hash + ".jpg");
}

void ProjectStore::save(const Project& p) const {
  fs::create_directories(project_dir(p.project_id));
  write_file_atomic((project_dir(p.project_id) / "project.json").string(), project_json(p) + "\n");
}

Project ProjectStore::create_project(const std::string& name, const fs::path& corpus_root) {
  if (name.empty()) throw ValidationError("project name must not be empty");
  std::error_code ec;
  if (!fs::is_directory(corpus_root, ec)) {
    throw ValidationError("corpus root " + corpus_root.string() + " is not a readable directory");
  }
  fs::directory_iterator probe(corpus_root, ec);
  if (ec) throw ValidationError("corpus root " + corpus_root.string() + " is unreadable: " + ec.message());

  std::unique_lock lock(mutex_);
  const std::string id = project_id_for_name(name);
  if (projects_.count(id)) throw ConflictError("project '" + name + "' already exists");
  Project p;
  p.project_id = id;
  p.name = name;
  p.corpus_root = fs::absolute(corpus_root).lexically_normal().string();
  p.created_at = utc_timestamp();
  save(p);
  projects_.emplace(id, p);
  return p;
}

Project ProjectStore::get(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = projects_.find(id);
  if (it == projects_.end()) throw NotFoundError("no project with id '" + id + "'");
  return it->second;
}

std::vector<Project> ProjectStore::list() const {
  std::shared_lock lock(mutex_);
  std::vector<Project> out;
  for (const auto& [id, p] : projects_) out.push_back(p);
  return out;
}

std::uint32_t ProjectStore::begin_round(const std::string& id, RoundInfo draft) {
  std::unique_lock lock(mutex_);
  auto it = projects_.find(id);
  if (it == projects_.end()) throw NotFoundError("no project with id '" + id + "'");
  Project p = it->second;
  std::uint32_t next = 1;
  for (const auto& r : p.rounds) next = std::max(next, r.round + 1);
  draft.round = next;
  draft.status = RoundStatus::running;
  if (draft.created_at.empty()) draft.created_at = utc_timestamp();
  p.rounds.push_back(draft);
  save(p);
  it->second = std::move(p);
  return next;
}

void ProjectStore::update_round(const std::string& id, const RoundInfo& info) {
  std::unique_lock lock(mutex_);
  auto it = projects_.find(id);
  if (it == projects_.end()) throw NotFoundError("no project with id '" + id + "'");
  Project p = it->second;
  auto r = std::find_if(p.rounds.begin(), p.rounds.end(), [&](const RoundInfo& x) { return x.round == info.round; });
  if (r == p.rounds.end()) throw NotFoundError("no round " + std::to_string(info.round));
  *r = info;
  save(p);
  it->second = std::move(p);
}

void ProjectStore::drop_round(const std::string& id, std::uint32_t round) {
  std::unique_lock lock(mutex_);
  auto it = projects_.find(id);
  if (it == projects_.end()) throw NotFoundError("no project with id '" + id + "'");
  Project p = it->second;
  std::erase_if(p.rounds, [&](const RoundInfo& x) { return x.round == round; });
  save(p);
  it->second = std::move(p);
}

void RoundData::index_lookups() {
  ordinal_of.clear();
  group_index_of.clear();
  row_of.clear();
  for (std::size_t i = 0; i < manifest.size(); ++i) ordinal_of.emplace(manifest[i].image_id, i);
  for (std::size_t g = 0; g < groups.size(); ++g) group_index_of.emplace(groups[g].group_id, g);
  for (std::size_t r = 0; r < vectors.rows(); ++r) row_of.emplace(vectors.ordinal(r), r);
  ranked = kmeans::rank_members(model, vectors, manifest);
}

std::optional<std::size_t> RoundData::vector_row_for(const std::string& image_id) const {
  auto rec = ordinal_of.find(image_id);
  if (rec == ordinal_of.end()) return std::nullopt;
  const auto& record = manifest[rec->second];
  if (!record.clusterable()) return std::nullopt;
  auto g = group_index_of.find(record.dedup_group_id);
  if (g == group_index_of.end()) return std::nullopt;
  auto rep = ordinal_of.find(groups[g->second].representative_image_id);
  if (rep == ordinal_of.end()) return std::nullopt;
  auto row = row_of.find(rep->second);
  if (row == row_of.end()) return std::nullopt;
  return row->second;
}

const ann::KdForest& RoundData::forest() const {
  std::call_once(forest_once_, [&] {
    forest_ = std::make_unique<ann::KdForest>(ann::KdForest::build(vectors, info.forest));
  });
  return *forest_;
}

std::string summaries_json(std::span<const kmeans::ClusterSummary> summaries) {
  ordered_json arr = ordered_json::array();
  for (const auto& s : summaries) {
    ordered_json j;
    j["cluster_index"] = s.cluster_index;
    j["size_representatives"] = s.size_representatives;
    j["size_total_images"] = s.size_total_images;
    j["medoid_image_id"] = s.medoid_image_id;
    j["sample_image_ids"] = s.sample_image_ids;
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

std::vector<kmeans::ClusterSummary> parse_summaries_json(const std::string& text) {
  return parse_json_or_fail("cluster summaries", [&] {
    std::vector<kmeans::ClusterSummary> out;
    for (const auto& j : ordered_json::parse(text)) {
      kmeans::ClusterSummary s;
      s.cluster_index = j.at("cluster_index").get<std::uint32_t>();
      s.size_representatives = j.at("size_representatives").get<std::size_t>();
      s.size_total_images = j.at("size_total_images").get<std::size_t>();
      s.medoid_image_id = j.at("medoid_image_id").get<std::string>();
      s.sample_image_ids = j.at("sample_image_ids").get<std::vector<std::string>>();
      out.push_back(std::move(s));
    }
    return out;
  });
}

void write_round_artifacts(const fs::path& dir, const RoundData& data, std::span<const corpus::TallyRow> tally) {
  fs::create_directories(dir);
  corpus::write_manifest(dir / "manifest.jsonl", data.manifest);
  corpus::write_groups(dir / "groups.jsonl", data.groups);
  corpus::write_tally(dir / "tally.csv", corpus::FrequencyTally(tally.begin(), tally.end()));
  embedding::write_vectors(dir / "vectors.fvec", data.vectors);
  kmeans::write_model(dir / "model.kmeans", data.model);
  write_file_atomic((dir / "summaries.json").string(), summaries_json(data.summaries) + "\n");
  write_file_atomic((dir / "round.json").string(), round_info_json(data.info) + "\n");
}

std::shared_ptr<RoundData> load_round_artifacts(const fs::path& dir) {
  auto data = std::make_shared<RoundData>();
  data->info = parse_round_info_json(read_file((dir / "round.json").string()));
  data->manifest = corpus::read_manifest(dir / "manifest.jsonl");
  data->groups = corpus::read_groups(dir / "groups.jsonl");
  data->vectors = embedding::read_vectors(dir / "vectors.fvec");
  data->model = kmeans::read_model(dir / "model.kmeans");
  data->summaries = parse_summaries_json(read_file((dir / "summaries.json").string()));
  data->index_lookups();
  return data;
}

}  // namespace imgclust::review
