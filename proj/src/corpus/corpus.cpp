#include "imgclust/corpus/corpus.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "imgclust/common/errors.hpp"
#include "imgclust/common/parallel.hpp"
#include "imgclust/common/text.hpp"
#include "imgclust/corpus/image_io.hpp"

namespace fs = std::filesystem;

namespace imgclust::corpus {

std::string_view exclusion_reason_name(ExclusionReason r) {
  switch (r) {
    case ExclusionReason::high_frequency: return "high_frequency";
    case ExclusionReason::invalid: return "invalid";
    case ExclusionReason::none: break;
  }
  return "none";
}

ExclusionReason parse_exclusion_reason(std::string_view name) {
  if (name == "none") return ExclusionReason::none;
  if (name == "high_frequency") return ExclusionReason::high_frequency;
  if (name == "invalid") return ExclusionReason::invalid;
  throw ValidationError("unknown exclusion reason '" + std::string(name) + "'");
}

std::string image_id_for_path(std::string_view relative_path) {
  return hash_string(relative_path, HashAlgorithm::sha256).substr(0, 16);
}

namespace {

bool has_allowed_extension(const fs::path& p, const std::vector<std::string>& allowed) {
  std::string ext = p.extension().string();
  if (ext.empty()) return false;
  ext = to_lower(ext.substr(1));
  return std::any_of(allowed.begin(), allowed.end(),
                     [&](const std::string& a) { return to_lower(a) == ext; });
}

std::vector<fs::path> list_candidates(const fs::path& root, const ScanOptions& options) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw RuntimeFailure("corpus root is not a readable directory: " + root.string());
  }
  std::vector<fs::path> files;
  auto visit = [&](const fs::directory_entry& entry) {
    std::error_code fec;
    if (entry.is_regular_file(fec) && has_allowed_extension(entry.path(), options.extensions)) {
      files.push_back(entry.path());
    }
  };
  try {
    if (options.recurse) {
      for (fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied), end;
           it != end; ++it) {
        visit(*it);
      }
    } else {
      for (const auto& entry : fs::directory_iterator(root)) visit(entry);
    }
  } catch (const fs::filesystem_error& e) {
    throw RuntimeFailure("cannot scan corpus root " + root.string() + ": " + e.what());
  }
  return files;
}

void fill_record(const fs::path& file, HashAlgorithm algo, ImageRecord& rec) {
  std::error_code ec;
  const auto size = fs::file_size(file, ec);
  rec.byte_size = ec ? 0 : size;
  rec.format = std::string(kInvalidFormat);
  rec.excluded = true;
  rec.exclusion_reason = ExclusionReason::invalid;

  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_binary_file(file);
  } catch (const RuntimeFailure&) {
    return;
  }
  rec.byte_size = bytes.size();
  rec.content_hash = hash_bytes(bytes, algo);
  const DecodeResult decoded = decode_image(bytes);
  if (!decoded.ok()) return;
  rec.format = std::string(format_name(decoded.format));
  rec.width = decoded.raster.width;
  rec.height = decoded.raster.height;
  rec.dedup_group_id = rec.content_hash;
  rec.excluded = false;
  rec.exclusion_reason = ExclusionReason::none;
}

}  // namespace

std::vector<ImageRecord> scan_corpus(const fs::path& root, const ScanOptions& options) {
  std::vector<fs::path> files = list_candidates(root, options);

  std::vector<ImageRecord> records(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    records[i].path = files[i].lexically_relative(root).generic_string();
  }
  std::vector<std::size_t> order(files.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return records[a].path < records[b].path; });

  std::vector<ImageRecord> sorted(files.size());
  std::vector<fs::path> sorted_files(files.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted[i] = std::move(records[order[i]]);
    sorted_files[i] = std::move(files[order[i]]);
  }

  parallel_chunks(sorted.size(), 16, options.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      sorted[i].image_id = image_id_for_path(sorted[i].path);
      fill_record(sorted_files[i], options.hash, sorted[i]);
    }
  });
  return sorted;
}

std::vector<DedupGroup> deduplicate(std::span<const ImageRecord> records) {
  std::map<std::string, std::vector<const ImageRecord*>> by_hash;
  for (const auto& rec : records) {
    if (rec.valid()) by_hash[rec.content_hash].push_back(&rec);
  }
  std::vector<DedupGroup> groups;
  groups.reserve(by_hash.size());
  for (auto& [hash, members] : by_hash) {
    std::sort(members.begin(), members.end(),
              [](const ImageRecord* a, const ImageRecord* b) { return a->path < b->path; });
    DedupGroup g;
    g.group_id = hash;
    g.content_hash = hash;
    g.representative_image_id = members.front()->image_id;
    g.frequency = members.size();
    g.member_ids.reserve(members.size());
    for (const auto* m : members) g.member_ids.push_back(m->image_id);
    groups.push_back(std::move(g));
  }
  // by_hash iterates in hash order, so a stable sort on frequency leaves the
  // hash as tiebreaker.
  std::stable_sort(groups.begin(), groups.end(),
                   [](const DedupGroup& a, const DedupGroup& b) { return a.frequency > b.frequency; });
  return groups;
}

FrequencyTally tally_frequencies(std::span<const DedupGroup> groups,
                                 std::span<const ImageRecord> records) {
  std::unordered_map<std::string_view, const ImageRecord*> by_id;
  by_id.reserve(records.size());
  for (const auto& rec : records) by_id.emplace(rec.image_id, &rec);

  FrequencyTally tally;
  tally.reserve(groups.size());
  for (const auto& g : groups) {
    TallyRow row;
    row.content_hash = g.content_hash;
    row.frequency = g.frequency;
    if (auto it = by_id.find(g.representative_image_id); it != by_id.end()) {
      row.byte_size = it->second->byte_size;
      row.sample_path = it->second->path;
    }
    tally.push_back(std::move(row));
  }
  std::stable_sort(tally.begin(), tally.end(), [](const TallyRow& a, const TallyRow& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    return a.content_hash < b.content_hash;
  });
  return tally;
}

std::vector<ImageRecord> exclude_high_frequency(std::span<const ImageRecord> records,
                                                std::span<const DedupGroup> groups,
                                                const ExclusionCriterion& criterion) {
  if (criterion.min_frequency.has_value() == criterion.content_hashes.has_value()) {
    throw ValidationError("exactly one of a frequency threshold or a hash list is required");
  }
  if (criterion.min_frequency && *criterion.min_frequency < 2) {
    throw ValidationError("frequency threshold must be at least 2");
  }

  std::unordered_set<std::string> hash_list;
  if (criterion.content_hashes) {
    for (const auto& h : *criterion.content_hashes) hash_list.insert(to_lower(h));
  }
  std::unordered_set<std::string_view> doomed;
  for (const auto& g : groups) {
    const bool match = criterion.min_frequency ? g.frequency >= *criterion.min_frequency
                                               : hash_list.count(g.content_hash) > 0;
    if (!match) continue;
    for (const auto& id : g.member_ids) doomed.insert(id);
  }

  std::vector<ImageRecord> out(records.begin(), records.end());
  for (auto& rec : out) {
    if (rec.valid() && doomed.count(rec.image_id)) {
      rec.excluded = true;
      rec.exclusion_reason = ExclusionReason::high_frequency;
    }
  }
  return out;
}

CorpusCounts count_records(std::span<const ImageRecord> records) {
  CorpusCounts c;
  c.total = records.size();
  for (const auto& rec : records) {
    if (!rec.valid()) {
      ++c.invalid;
    } else if (rec.excluded) {
      ++c.excluded_high_frequency;
    } else {
      ++c.clusterable;
    }
  }
  return c;
}

}  // namespace imgclust::corpus
