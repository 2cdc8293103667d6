#include "imgclust/review/report.hpp"

#include <json.hpp>
#include <unordered_map>

#include "imgclust/common/errors.hpp"
#include "imgclust/common/text.hpp"

using ordered_json = nlohmann::ordered_json;

namespace imgclust::review {

CategorizationReport build_report(std::uint32_t round, std::uint64_t corpus_images,
                                  std::uint64_t excluded_prefilter, std::uint64_t invalid,
                                  std::span<const ReportRow> rows) {
  CategorizationReport report;
  report.round = round;
  report.corpus_images = corpus_images;
  report.rows.assign(rows.begin(), rows.end());
  ReportTotals& t = report.totals;
  t.images_excluded_prefilter = excluded_prefilter;
  t.images_invalid = invalid;
  for (const auto& row : rows) {
    switch (row.label) {
      case Label::responsive: t.images_responsive += row.size_images; break;
      case Label::not_responsive: t.images_not_responsive += row.size_images; break;
      case Label::further_review: t.images_further_review += row.size_images; break;
      case Label::untagged: t.images_untagged += row.size_images; break;
    }
  }
  if (t.sum() != corpus_images) {
    throw RuntimeFailure("report totals do not reconcile: " + std::to_string(t.sum()) + " images accounted, " +
                         std::to_string(corpus_images) + " in corpus");
  }
  return report;
}

CategorizationReport build_report(std::uint32_t round, std::span<const corpus::ImageRecord> manifest,
                                  std::span<const kmeans::ClusterSummary> summaries,
                                  std::span<const ClusterLabel> labels) {
  const auto counts = corpus::count_records(manifest);
  std::unordered_map<std::string_view, const corpus::ImageRecord*> by_id;
  for (const auto& r : manifest) by_id.emplace(r.image_id, &r);

  std::vector<ReportRow> rows;
  rows.reserve(summaries.size());
  for (const auto& s : summaries) {
    ReportRow row;
    row.cluster_index = s.cluster_index;
    row.size_images = s.size_total_images;
    if (s.cluster_index < labels.size()) {
      row.label = labels[s.cluster_index].label;
      row.note = labels[s.cluster_index].note;
    }
    row.medoid_image_id = s.medoid_image_id;
    if (auto it = by_id.find(s.medoid_image_id); it != by_id.end()) {
      row.medoid_content_hash = it->second->content_hash;
    }
    rows.push_back(std::move(row));
  }
  return build_report(round, counts.total, counts.excluded_high_frequency, counts.invalid, rows);
}

namespace {

std::vector<std::pair<const char*, std::uint64_t>> named_totals(const CategorizationReport& r) {
  const ReportTotals& t = r.totals;
  return {{"images_responsive", t.images_responsive},
          {"images_not_responsive", t.images_not_responsive},
          {"images_further_review", t.images_further_review},
          {"images_untagged", t.images_untagged},
          {"images_excluded_prefilter", t.images_excluded_prefilter},
          {"images_invalid", t.images_invalid}};
}

}  // namespace

std::string report_csv(const CategorizationReport& report) {
  std::string out = "cluster_index,size_images,label,note\n";
  for (const auto& row : report.rows) {
    out += std::to_string(row.cluster_index) + "," + std::to_string(row.size_images) + "," +
           std::string(label_name(row.label)) + "," + csv_field(row.note) + "\n";
  }
  out += "#TOTALS\n";
  for (const auto& [name, value] : named_totals(report)) {
    out += std::string(name) + "," + std::to_string(value) + "\n";
  }
  out += "corpus_images," + std::to_string(report.corpus_images) + "\n";
  return out;
}

std::string report_json(const CategorizationReport& report) {
  ordered_json j;
  j["round"] = report.round;
  j["corpus_images"] = report.corpus_images;
  ordered_json totals = ordered_json::object();
  for (const auto& [name, value] : named_totals(report)) totals[name] = value;
  j["totals"] = totals;
  ordered_json rows = ordered_json::array();
  for (const auto& row : report.rows) {
    ordered_json r;
    r["cluster_index"] = row.cluster_index;
    r["size_images"] = row.size_images;
    r["label"] = std::string(label_name(row.label));
    r["note"] = row.note;
    r["medoid_image_id"] = row.medoid_image_id;
    r["medoid_thumbnail"] = row.medoid_content_hash.empty() ? "" : "/api/thumbnails/" + row.medoid_content_hash;
    rows.push_back(std::move(r));
  }
  j["clusters"] = rows;
  return j.dump(2);
}

}  // namespace imgclust::review
