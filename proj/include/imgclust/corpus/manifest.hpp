#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "imgclust/corpus/corpus.hpp"

namespace imgclust::corpus {

// Manifest: UTF-8, one JSON object per line, fields as in ImageRecord.
std::string manifest_line(const ImageRecord& record);
ImageRecord parse_manifest_line(const std::string& line);
void write_manifest(const std::filesystem::path& path, std::span<const ImageRecord> records);
std::vector<ImageRecord> read_manifest(const std::filesystem::path& path);

// Dedup groups, one JSON object per line.
void write_groups(const std::filesystem::path& path, std::span<const DedupGroup> groups);
std::vector<DedupGroup> read_groups(const std::filesystem::path& path);

// CSV with header content_hash,byte_size,frequency,sample_path.
std::string tally_csv(const FrequencyTally& tally);
void write_tally(const std::filesystem::path& path, const FrequencyTally& tally);
FrequencyTally read_tally(const std::filesystem::path& path);

}  // namespace imgclust::corpus
