#include "imgclust/review/tag_log.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "imgclust/common/text.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace imgclust::review {

std::string event_line(const TagEvent& e) {
  ordered_json j;
  j["seq"] = e.sequence;
  j["round"] = e.round;
  j["cluster"] = e.cluster_index;
  j["label"] = std::string(label_name(e.label));
  j["note"] = e.note;
  j["author"] = e.author;
  j["ts"] = e.timestamp;
  return j.dump();
}

TagEvent parse_event_line(const std::string& line) {
  TagEvent e;
  try {
    const auto j = ordered_json::parse(line);
    e.sequence = j.at("seq").get<std::uint64_t>();
    e.round = j.at("round").get<std::uint32_t>();
    e.cluster_index = j.at("cluster").get<std::uint32_t>();
    e.label = parse_assignable_label(j.at("label").get<std::string>());
    e.note = j.at("note").get<std::string>();
    e.author = j.at("author").get<std::string>();
    e.timestamp = j.at("ts").get<std::string>();
  } catch (const nlohmann::json::exception& ex) {
    throw RuntimeFailure(std::string("corrupt tag event: ") + ex.what());
  } catch (const ValidationError& ex) {
    throw RuntimeFailure(std::string("corrupt tag event: ") + ex.what());
  }
  return e;
}

void apply_event(LabelState& state, const TagEvent& e) {
  ClusterLabel& cur = state[{e.round, e.cluster_index}];
  if (e.sequence < cur.sequence) return;
  cur = {e.label, e.note, e.sequence, e.author, e.timestamp};
}

LabelState replay(std::vector<TagEvent> events) {
  std::stable_sort(events.begin(), events.end(),
                   [](const TagEvent& a, const TagEvent& b) { return a.sequence < b.sequence; });
  LabelState state;
  for (const auto& e : events) apply_event(state, e);
  return state;
}

std::string serialize_labels(const LabelState& state) {
  std::string out;
  for (const auto& [key, l] : state) {
    ordered_json j;
    j["round"] = key.first;
    j["cluster"] = key.second;
    j["label"] = std::string(label_name(l.label));
    j["note"] = l.note;
    j["seq"] = l.sequence;
    j["author"] = l.author;
    j["ts"] = l.timestamp;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<TagEvent> read_events(const fs::path& path) {
  std::vector<TagEvent> events;
  std::ifstream in(path);
  if (!in) return events;
  std::string line;
  std::uint64_t last = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    events.push_back(parse_event_line(line));
    if (events.back().sequence <= last) {
      throw RuntimeFailure("tag log " + path.string() + " has out-of-order sequence " +
                           std::to_string(events.back().sequence));
    }
    last = events.back().sequence;
  }
  return events;
}

TagLog::TagLog(fs::path path) : path_(std::move(path)) {
  events_ = read_events(path_);
  state_ = replay(events_);
}

TagEvent TagLog::append(std::uint32_t round, std::uint32_t cluster_index, Label label, std::string note,
                        std::string author) {
  if (label == Label::untagged) throw ValidationError("untagged cannot be assigned");
  std::lock_guard lock(mutex_);
  TagEvent e;
  e.sequence = events_.empty() ? 1 : events_.back().sequence + 1;
  e.round = round;
  e.cluster_index = cluster_index;
  e.label = label;
  e.note = std::move(note);
  e.author = std::move(author);
  e.timestamp = utc_timestamp();

  const std::string line = event_line(e) + "\n";
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw RuntimeFailure("cannot open tag log " + path_.string() + ": " + std::strerror(errno));
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string why = std::strerror(errno);
      ::close(fd);
      throw RuntimeFailure("cannot append to tag log " + path_.string() + ": " + why);
    }
    written += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);

  events_.push_back(e);
  apply_event(state_, e);
  return e;
}

std::vector<TagEvent> TagLog::events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

std::vector<TagEvent> TagLog::history(std::uint32_t round, std::uint32_t cluster_index) const {
  std::lock_guard lock(mutex_);
  std::vector<TagEvent> out;
  for (const auto& e : events_) {
    if (e.round == round && e.cluster_index == cluster_index) out.push_back(e);
  }
  return out;
}

LabelState TagLog::state() const {
  std::lock_guard lock(mutex_);
  return state_;
}

ClusterLabel TagLog::current(std::uint32_t round, std::uint32_t cluster_index) const {
  std::lock_guard lock(mutex_);
  auto it = state_.find({round, cluster_index});
  return it == state_.end() ? ClusterLabel{} : it->second;
}

std::vector<ClusterLabel> TagLog::round_labels(std::uint32_t round, std::size_t k) const {
  std::lock_guard lock(mutex_);
  std::vector<ClusterLabel> out(k);
  for (auto it = state_.lower_bound({round, 0}); it != state_.end() && it->first.first == round; ++it) {
    if (it->first.second < k) out[it->first.second] = it->second;
  }
  return out;
}

}  // namespace imgclust::review
