#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "imgclust/ann/neighbors.hpp"

namespace imgclust::ann {

// `checks` value that visits every leaf, making queries exact.
inline constexpr std::size_t kExhaustiveChecks = std::numeric_limits<std::size_t>::max();
inline constexpr std::size_t kSplitCandidates = 5;

struct ForestParams {
  std::size_t tree_count = 8;
  std::size_t leaf_size = 16;
  std::size_t checks = 512;  // max leaf visits per query
  std::uint64_t seed = 0;

  bool operator==(const ForestParams&) const = default;
};

// Randomized k-d tree forest. At each node the split dimension is drawn
// uniformly from the 5 highest-variance dimensions of the node's points and
// the split value is the median; every tree has its own random stream.
// Queries run best-bin-first across all trees with one shared queue of
// unexplored branches, stop after `checks` leaf visits, and rank candidates
// by exact distance.
class KdForest final : public NeighborIndex {
 public:
  // Throws ValidationError for an empty matrix, tree_count < 1 or leaf_size < 1.
  static KdForest build(const FeatureMatrix& vectors, const ForestParams& params);

  NeighborList query(const FeatureMatrix& vectors, std::span<const float> query, std::size_t k,
                     std::optional<std::size_t> exclude_row = std::nullopt) const override;
  NeighborList query(const FeatureMatrix& vectors, std::span<const float> query, std::size_t k,
                     std::optional<std::size_t> exclude_row, std::size_t checks) const;

  std::size_t size() const override { return points_; }
  std::uint64_t memory_bytes() const override;

  const ForestParams& params() const { return params_; }
  void set_checks(std::size_t checks) { params_.checks = checks; }

  std::size_t tree_count() const { return trees_.size(); }
  std::size_t leaf_count() const;
  std::size_t depth(std::size_t tree) const;
  // Row indices in leaf order for one tree.
  std::vector<std::uint32_t> tree_points(std::size_t tree) const;

 private:
  static constexpr std::uint32_t kNoChild = std::numeric_limits<std::uint32_t>::max();

  struct Node {
    float split_value = 0.0f;
    std::uint32_t split_dim = 0;
    std::uint32_t left = kNoChild;  // kNoChild marks a leaf
    std::uint32_t right = kNoChild;
    std::uint32_t begin = 0;  // leaf range in Tree::index
    std::uint32_t end = 0;

    bool leaf() const { return left == kNoChild; }
  };

  struct Tree {
    std::vector<Node> nodes;  // nodes[0] is the root
    std::vector<std::uint32_t> index;
  };

  static Tree build_tree(const FeatureMatrix& vectors, std::size_t leaf_size, std::uint64_t seed);

  ForestParams params_;
  std::size_t points_ = 0;
  std::size_t dim_ = 0;
  std::vector<Tree> trees_;
};

NeighborList query_knn(const KdForest& index, const FeatureMatrix& vectors, std::span<const float> query,
                       std::size_t k);
// Neighbors of an indexed row, the row itself excluded (mirrors exact_knn).
NeighborList query_knn(const KdForest& index, const FeatureMatrix& vectors, std::size_t query_row,
                       std::size_t k);

}  // namespace imgclust::ann
