#pragma once

#include <filesystem>
#include <string>

#include "imgclust/kmeans/kmeans.hpp"

namespace imgclust::kmeans {

// Layout:
//   "KMEANS1 k=<k> dim=<d> seed=<s> inertia=<f>\n"
//   k x d float32 LE centroid values
//   "assignments count=<n> iterations=<i>\n"
//   n x (uint64 LE ordinal, uint32 LE cluster)
std::string encode_model(const ClusterModel& model);
ClusterModel decode_model(std::string_view bytes);

void write_model(const std::filesystem::path& path, const ClusterModel& model);
ClusterModel read_model(const std::filesystem::path& path);

}  // namespace imgclust::kmeans
