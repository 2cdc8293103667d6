#include "imgclust/embedding/propagate.hpp"

#include "imgclust/common/errors.hpp"

namespace imgclust::embedding {

VectorMapping propagate_vectors(std::span<const corpus::DedupGroup> groups,
                                std::span<const corpus::ImageRecord> records,
                                std::span<const FeatureVector> representative_vectors) {
  std::unordered_map<std::string_view, const corpus::ImageRecord*> record_by_id;
  for (const auto& r : records) record_by_id.emplace(r.image_id, &r);
  std::unordered_map<std::string_view, const FeatureVector*> vector_by_id;
  for (const auto& v : representative_vectors) vector_by_id.emplace(v.image_id, &v);

  VectorMapping mapping;
  std::string missing;
  for (const auto& g : groups) {
    auto rec = record_by_id.find(g.representative_image_id);
    if (rec == record_by_id.end() || !rec->second->clusterable()) continue;
    auto vec = vector_by_id.find(g.representative_image_id);
    if (vec == vector_by_id.end()) {
      missing += (missing.empty() ? "" : ", ") + g.group_id;
      continue;
    }
    auto shared = std::make_shared<const FeatureVector>(*vec->second);
    for (const auto& member : g.member_ids) mapping.by_image_.emplace(member, shared);
  }
  if (!missing.empty()) {
    throw ValidationError("missing representative vectors for groups: " + missing);
  }
  return mapping;
}

}  // namespace imgclust::embedding
