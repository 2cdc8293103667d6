#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "imgclust/review/labels.hpp"

namespace imgclust::review {

struct TagEvent {
  std::uint64_t sequence = 0;
  std::uint32_t round = 0;
  std::uint32_t cluster_index = 0;
  Label label = Label::untagged;
  std::string note;
  std::string author;
  std::string timestamp;

  bool operator==(const TagEvent&) const = default;
};

struct ClusterLabel {
  Label label = Label::untagged;
  std::string note;
  std::uint64_t sequence = 0;  // 0 while untagged
  std::string author;
  std::string timestamp;

  bool operator==(const ClusterLabel&) const = default;
};

// Current label per (round, cluster). Absent keys are untagged.
using LabelState = std::map<std::pair<std::uint32_t, std::uint32_t>, ClusterLabel>;

std::string event_line(const TagEvent& e);
TagEvent parse_event_line(const std::string& line);

// Applies events in sequence order; the highest sequence wins per cluster.
LabelState replay(std::vector<TagEvent> events);
void apply_event(LabelState& state, const TagEvent& e);
// Stable text form used to compare states byte for byte.
std::string serialize_labels(const LabelState& state);

// Append-only event log backed by one JSONL file. Appends from any number of
// threads are serialized; each gets the next sequence number and is on disk
// before append() returns.
class TagLog {
 public:
  // Loads the existing file, if any. Throws RuntimeFailure on a corrupt line.
  explicit TagLog(std::filesystem::path path);

  TagEvent append(std::uint32_t round, std::uint32_t cluster_index, Label label, std::string note,
                  std::string author);

  std::vector<TagEvent> events() const;
  std::vector<TagEvent> history(std::uint32_t round, std::uint32_t cluster_index) const;
  LabelState state() const;
  ClusterLabel current(std::uint32_t round, std::uint32_t cluster_index) const;
  // Labels for one round, indexed by cluster; clusters >= k are ignored.
  std::vector<ClusterLabel> round_labels(std::uint32_t round, std::size_t k) const;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::vector<TagEvent> events_;
  LabelState state_;
};

// Reads a log file from scratch without touching any live TagLog.
std::vector<TagEvent> read_events(const std::filesystem::path& path);

}  // namespace imgclust::review
