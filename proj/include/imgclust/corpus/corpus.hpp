#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "imgclust/corpus/content_hash.hpp"

namespace imgclust::corpus {

enum class ExclusionReason { none, high_frequency, invalid };

std::string_view exclusion_reason_name(ExclusionReason r);
ExclusionReason parse_exclusion_reason(std::string_view name);

inline constexpr std::string_view kInvalidFormat = "invalid";

struct ImageRecord {
  std::string image_id;        // stable id derived from the relative path
  std::string path;            // relative to the corpus root, '/' separated
  std::uint64_t byte_size = 0;
  std::string content_hash;    // hex digest of the raw bytes; empty if unreadable
  std::string format;          // png | jpeg | gif | bmp | tiff | invalid
  int width = 0;
  int height = 0;
  std::string dedup_group_id;  // shared by byte-identical valid files
  bool excluded = false;
  ExclusionReason exclusion_reason = ExclusionReason::none;

  bool valid() const { return format != kInvalidFormat; }
  // Valid and not removed by the frequency prefilter.
  bool clusterable() const { return valid() && !excluded; }
  bool operator==(const ImageRecord&) const = default;
};

struct DedupGroup {
  std::string group_id;
  std::string content_hash;
  std::string representative_image_id;
  std::vector<std::string> member_ids;  // sorted by path
  std::size_t frequency = 0;

  bool operator==(const DedupGroup&) const = default;
};

struct TallyRow {
  std::string content_hash;
  std::uint64_t byte_size = 0;
  std::size_t frequency = 0;
  std::string sample_path;

  bool operator==(const TallyRow&) const = default;
};

using FrequencyTally = std::vector<TallyRow>;

inline const std::vector<std::string> kDefaultExtensions = {"png", "jpg",  "jpeg",
                                                            "gif", "bmp",  "tiff"};

struct ScanOptions {
  bool recurse = true;
  std::vector<std::string> extensions = kDefaultExtensions;  // case-insensitive
  HashAlgorithm hash = HashAlgorithm::sha256;
  std::size_t workers = 0;  // 0 = hardware concurrency
};

// Opaque image id for a corpus-relative path.
std::string image_id_for_path(std::string_view relative_path);

// One record per regular file with an allowed extension, sorted by path.
// Files that cannot be read or decoded are kept with format "invalid".
// Throws RuntimeFailure if the root is missing or unreadable.
std::vector<ImageRecord> scan_corpus(const std::filesystem::path& root, const ScanOptions& options = {});

// Partitions valid records by content hash. The representative of each group
// is the member with the smallest path; groups are ordered by frequency
// descending, then content hash ascending.
std::vector<DedupGroup> deduplicate(std::span<const ImageRecord> records);

// One row per group, same ordering as deduplicate().
FrequencyTally tally_frequencies(std::span<const DedupGroup> groups,
                                 std::span<const ImageRecord> records);

struct ExclusionCriterion {
  std::optional<std::size_t> min_frequency;
  std::optional<std::vector<std::string>> content_hashes;

  static ExclusionCriterion threshold(std::size_t min_frequency) {
    return {min_frequency, std::nullopt};
  }
  static ExclusionCriterion hashes(std::vector<std::string> list) {
    return {std::nullopt, std::move(list)};
  }
};

// Marks every member of each matching group excluded=high_frequency. Records
// are never dropped and reapplying the same criterion is a no-op. Throws
// ValidationError unless exactly one criterion is given, or if the threshold
// is below 2.
std::vector<ImageRecord> exclude_high_frequency(std::span<const ImageRecord> records,
                                                std::span<const DedupGroup> groups,
                                                const ExclusionCriterion& criterion);

struct CorpusCounts {
  std::size_t total = 0;
  std::size_t invalid = 0;
  std::size_t excluded_high_frequency = 0;
  std::size_t clusterable = 0;
};

CorpusCounts count_records(std::span<const ImageRecord> records);

}  // namespace imgclust::corpus
