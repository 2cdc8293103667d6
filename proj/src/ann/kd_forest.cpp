#include "imgclust/ann/kd_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>
#include <string>

#include "imgclust/common/errors.hpp"

namespace imgclust::ann {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

struct Branch {
  double key;
  std::uint32_t tree;
  std::uint32_t node;

  bool operator>(const Branch& o) const {
    if (key != o.key) return key > o.key;
    if (tree != o.tree) return tree > o.tree;
    return node > o.node;
  }
};

}  // namespace

KdForest::Tree KdForest::build_tree(const FeatureMatrix& vectors, std::size_t leaf_size, std::uint64_t seed) {
  const std::size_t dim = vectors.dim();
  std::mt19937_64 rng(seed);
  Tree tree;
  tree.index.resize(vectors.rows());
  std::iota(tree.index.begin(), tree.index.end(), 0u);

  struct Pending {
    std::uint32_t node, begin, end;
  };
  std::vector<Pending> stack;
  tree.nodes.push_back({});
  stack.push_back({0, 0, static_cast<std::uint32_t>(vectors.rows())});

  std::vector<double> mean(dim), var(dim);
  std::vector<std::uint32_t> dims(dim);

  while (!stack.empty()) {
    const Pending p = stack.back();
    stack.pop_back();
    auto make_leaf = [&] {
      tree.nodes[p.node].begin = p.begin;
      tree.nodes[p.node].end = p.end;
    };
    const std::size_t count = p.end - p.begin;
    if (count <= leaf_size) {
      make_leaf();
      continue;
    }

    std::fill(mean.begin(), mean.end(), 0.0);
    std::fill(var.begin(), var.end(), 0.0);
    for (std::uint32_t i = p.begin; i < p.end; ++i) {
      const auto x = vectors.row(tree.index[i]);
      for (std::size_t d = 0; d < dim; ++d) mean[d] += x[d];
    }
    for (auto& m : mean) m /= static_cast<double>(count);
    for (std::uint32_t i = p.begin; i < p.end; ++i) {
      const auto x = vectors.row(tree.index[i]);
      for (std::size_t d = 0; d < dim; ++d) {
        const double dev = x[d] - mean[d];
        var[d] += dev * dev;
      }
    }
    std::iota(dims.begin(), dims.end(), 0u);
    const std::size_t top = std::min(kSplitCandidates, dim);
    std::partial_sort(dims.begin(), dims.begin() + static_cast<std::ptrdiff_t>(top), dims.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                        if (var[a] != var[b]) return var[a] > var[b];
                        return a < b;
                      });
    std::uint32_t split_dim = dims[rng() % top];
    if (var[split_dim] <= 0.0) split_dim = dims[0];
    if (var[split_dim] <= 0.0) {
      // Every point in this node is identical.
      make_leaf();
      continue;
    }

    auto value = [&](std::uint32_t row) { return vectors.row(row)[split_dim]; };
    auto first = tree.index.begin() + p.begin;
    auto last = tree.index.begin() + p.end;
    auto mid = first + static_cast<std::ptrdiff_t>(count / 2);
    std::nth_element(first, mid, last, [&](std::uint32_t a, std::uint32_t b) { return value(a) < value(b); });
    float split = value(*mid);
    // Left holds values < split, right holds values >= split, so a query that
    // equals an indexed point always descends to that point's leaf.
    auto cut = std::partition(first, last, [&](std::uint32_t r) { return value(r) < split; });
    if (cut == first) {
      // The median is the minimum: split above it instead.
      cut = std::partition(first, last, [&](std::uint32_t r) { return value(r) <= split; });
      if (cut == last) {
        make_leaf();
        continue;
      }
      float next = std::numeric_limits<float>::infinity();
      for (auto it = cut; it != last; ++it) next = std::min(next, value(*it));
      split = next;
    }

    const auto left = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes.push_back({});
    Node& node = tree.nodes[p.node];
    node.split_dim = split_dim;
    node.split_value = split;
    node.left = left;
    node.right = left + 1;
    const auto cut_at = static_cast<std::uint32_t>(cut - tree.index.begin());
    stack.push_back({left + 1, cut_at, p.end});
    stack.push_back({left, p.begin, cut_at});
  }
  return tree;
}

KdForest KdForest::build(const FeatureMatrix& vectors, const ForestParams& params) {
  if (vectors.empty()) throw ValidationError("cannot index an empty vector set");
  if (params.tree_count < 1) throw ValidationError("tree_count must be at least 1");
  if (params.leaf_size < 1) throw ValidationError("leaf_size must be at least 1");
  if (vectors.rows() >= std::numeric_limits<std::uint32_t>::max()) throw ValidationError("too many vectors");

  KdForest forest;
  forest.params_ = params;
  forest.points_ = vectors.rows();
  forest.dim_ = vectors.dim();
  forest.trees_.reserve(params.tree_count);
  for (std::size_t t = 0; t < params.tree_count; ++t) {
    forest.trees_.push_back(build_tree(vectors, params.leaf_size, splitmix64(params.seed + t)));
  }
  return forest;
}

NeighborList KdForest::query(const FeatureMatrix& vectors, std::span<const float> query, std::size_t k,
                             std::optional<std::size_t> exclude_row) const {
  return this->query(vectors, query, k, exclude_row, params_.checks);
}

NeighborList KdForest::query(const FeatureMatrix& vectors, std::span<const float> query, std::size_t k,
                             std::optional<std::size_t> exclude_row, std::size_t checks) const {
  if (k == 0) throw ValidationError("k must be at least 1");
  if (query.size() != dim_ || vectors.dim() != dim_) {
    throw ValidationError("query dim " + std::to_string(query.size()) + " does not match index dim " +
                          std::to_string(dim_));
  }
  if (vectors.rows() != points_) throw ValidationError("vectors do not match the indexed set");

  std::vector<char> seen(points_, 0);
  using Candidate = std::pair<double, std::uint64_t>;  // (squared distance, row)
  std::priority_queue<Candidate> best;                 // max-heap of the current top k
  std::priority_queue<Branch, std::vector<Branch>, std::greater<>> branches;
  std::size_t leaves_visited = 0;

  auto descend = [&](std::uint32_t t, std::uint32_t node_id, double mindist) {
    const Tree& tree = trees_[t];
    while (!tree.nodes[node_id].leaf()) {
      const Node& node = tree.nodes[node_id];
      const double diff = double(query[node.split_dim]) - double(node.split_value);
      const bool go_left = diff < 0.0;
      branches.push({mindist + diff * diff, t, go_left ? node.right : node.left});
      node_id = go_left ? node.left : node.right;
    }
    if (leaves_visited >= checks) return;
    ++leaves_visited;
    const Node& leaf = tree.nodes[node_id];
    for (std::uint32_t i = leaf.begin; i < leaf.end; ++i) {
      const std::uint32_t row = tree.index[i];
      if (seen[row]) continue;
      seen[row] = 1;
      if (exclude_row && *exclude_row == row) continue;
      const Candidate c{squared_distance(query, vectors.row(row)), row};
      if (best.size() < k) {
        best.push(c);
      } else if (c < best.top()) {
        best.pop();
        best.push(c);
      }
    }
  };

  for (std::uint32_t t = 0; t < trees_.size(); ++t) descend(t, 0, 0.0);
  while (!branches.empty() && leaves_visited < checks) {
    const Branch b = branches.top();
    branches.pop();
    descend(b.tree, b.node, b.key);
  }

  NeighborList out;
  out.query = exclude_row ? *exclude_row : kFreeQuery;
  out.k = k;
  out.neighbors.resize(best.size());
  for (std::size_t i = best.size(); i-- > 0;) {
    out.neighbors[i] = {best.top().second, std::sqrt(best.top().first)};
    best.pop();
  }
  return out;
}

std::uint64_t KdForest::memory_bytes() const {
  std::uint64_t bytes = sizeof(*this);
  for (const auto& t : trees_) {
    bytes += sizeof(Tree) + t.nodes.capacity() * sizeof(Node) + t.index.capacity() * sizeof(std::uint32_t);
  }
  return bytes;
}

std::size_t KdForest::leaf_count() const {
  std::size_t n = 0;
  for (const auto& t : trees_) {
    for (const auto& node : t.nodes) n += node.leaf() ? 1 : 0;
  }
  return n;
}

std::size_t KdForest::depth(std::size_t tree) const {
  const Tree& t = trees_.at(tree);
  std::size_t deepest = 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!t.nodes[id].leaf()) {
      stack.push_back({t.nodes[id].left, d + 1});
      stack.push_back({t.nodes[id].right, d + 1});
    }
  }
  return deepest;
}

std::vector<std::uint32_t> KdForest::tree_points(std::size_t tree) const {
  const Tree& t = trees_.at(tree);
  std::vector<std::uint32_t> out;
  out.reserve(points_);
  std::vector<std::uint32_t> stack{0};
  while (!stack.empty()) {
    const Node& n = t.nodes[stack.back()];
    stack.pop_back();
    if (n.leaf()) {
      out.insert(out.end(), t.index.begin() + n.begin, t.index.begin() + n.end);
    } else {
      stack.push_back(n.right);
      stack.push_back(n.left);
    }
  }
  return out;
}

NeighborList query_knn(const KdForest& index, const FeatureMatrix& vectors, std::span<const float> query,
                       std::size_t k) {
  return index.query(vectors, query, k);
}

NeighborList query_knn(const KdForest& index, const FeatureMatrix& vectors, std::size_t query_row,
                       std::size_t k) {
  if (query_row >= vectors.rows()) throw ValidationError("query row out of range");
  NeighborList out = index.query(vectors, vectors.row(query_row), k, query_row);
  out.query = query_row;
  return out;
}

}  // namespace imgclust::ann
