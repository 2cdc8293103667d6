#include "imgclust/corpus/manifest.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "imgclust/common/errors.hpp"
#include "imgclust/common/text.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace imgclust::corpus {

std::string manifest_line(const ImageRecord& r) {
  ordered_json j;
  j["image_id"] = r.image_id;
  j["path"] = r.path;
  j["byte_size"] = r.byte_size;
  j["content_hash"] = r.content_hash;
  j["format"] = r.format;
  j["width"] = r.width;
  j["height"] = r.height;
  j["dedup_group_id"] = r.dedup_group_id;
  j["excluded"] = r.excluded;
  j["exclusion_reason"] = std::string(exclusion_reason_name(r.exclusion_reason));
  return j.dump();
}

ImageRecord parse_manifest_line(const std::string& line) {
  ImageRecord r;
  try {
    const auto j = ordered_json::parse(line);
    r.image_id = j.at("image_id").get<std::string>();
    r.path = j.at("path").get<std::string>();
    r.byte_size = j.at("byte_size").get<std::uint64_t>();
    r.content_hash = j.at("content_hash").get<std::string>();
    r.format = j.at("format").get<std::string>();
    r.width = j.at("width").get<int>();
    r.height = j.at("height").get<int>();
    r.dedup_group_id = j.at("dedup_group_id").get<std::string>();
    r.excluded = j.at("excluded").get<bool>();
    r.exclusion_reason = parse_exclusion_reason(j.at("exclusion_reason").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed manifest line: ") + e.what());
  }
  if ((r.exclusion_reason == ExclusionReason::invalid) != !r.valid()) {
    throw ValidationError("manifest record " + r.image_id +
                          ": exclusion_reason=invalid must match format=invalid");
  }
  return r;
}

namespace {

template <typename T, typename Fn>
void write_lines(const fs::path& path, std::span<const T> items, Fn&& line) {
  std::string out;
  for (const auto& item : items) {
    out += line(item);
    out += '\n';
  }
  write_file_atomic(path.string(), out);
}

template <typename Fn>
void read_lines(const fs::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw RuntimeFailure("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      fn(line);
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace

void write_manifest(const fs::path& path, std::span<const ImageRecord> records) {
  write_lines(path, records, manifest_line);
}

std::vector<ImageRecord> read_manifest(const fs::path& path) {
  std::vector<ImageRecord> records;
  read_lines(path, [&](const std::string& line) { records.push_back(parse_manifest_line(line)); });
  return records;
}

void write_groups(const fs::path& path, std::span<const DedupGroup> groups) {
  write_lines(path, groups, [](const DedupGroup& g) {
    ordered_json j;
    j["group_id"] = g.group_id;
    j["content_hash"] = g.content_hash;
    j["representative_image_id"] = g.representative_image_id;
    j["member_ids"] = g.member_ids;
    j["frequency"] = g.frequency;
    return j.dump();
  });
}

std::vector<DedupGroup> read_groups(const fs::path& path) {
  std::vector<DedupGroup> groups;
  read_lines(path, [&](const std::string& line) {
    try {
      const auto j = ordered_json::parse(line);
      DedupGroup g;
      g.group_id = j.at("group_id").get<std::string>();
      g.content_hash = j.at("content_hash").get<std::string>();
      g.representative_image_id = j.at("representative_image_id").get<std::string>();
      g.member_ids = j.at("member_ids").get<std::vector<std::string>>();
      g.frequency = j.at("frequency").get<std::size_t>();
      if (g.frequency != g.member_ids.size() || g.frequency == 0) {
        throw ValidationError("group " + g.group_id + ": frequency does not match members");
      }
      groups.push_back(std::move(g));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("malformed group line: ") + e.what());
    }
  });
  return groups;
}

std::string tally_csv(const FrequencyTally& tally) {
  std::ostringstream out;
  out << "content_hash,byte_size,frequency,sample_path\n";
  for (const auto& row : tally) {
    out << row.content_hash << ',' << row.byte_size << ',' << row.frequency << ','
        << csv_field(row.sample_path) << '\n';
  }
  return out.str();
}

void write_tally(const fs::path& path, const FrequencyTally& tally) {
  write_file_atomic(path.string(), tally_csv(tally));
}

FrequencyTally read_tally(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeFailure("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "content_hash,byte_size,frequency,sample_path") {
    throw ValidationError(path.string() + ": missing tally header");
  }
  FrequencyTally tally;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = parse_csv_line(line);
    if (f.size() != 4) throw ValidationError(path.string() + ": expected 4 columns");
    tally.push_back({f[0], std::stoull(f[1]), static_cast<std::size_t>(std::stoull(f[2])), f[3]});
  }
  return tally;
}

}  // namespace imgclust::corpus
