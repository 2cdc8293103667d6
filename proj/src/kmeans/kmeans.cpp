#include "imgclust/kmeans/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>

#include "imgclust/common/errors.hpp"
#include "imgclust/common/parallel.hpp"

namespace imgclust::kmeans {

std::optional<std::uint32_t> ClusterModel::cluster_of(std::uint64_t ordinal) const {
  auto it = std::lower_bound(ordinals.begin(), ordinals.end(), ordinal);
  if (it == ordinals.end() || *it != ordinal) return std::nullopt;
  return assignments[static_cast<std::size_t>(it - ordinals.begin())];
}

std::size_t resolve_cluster_count(std::optional<std::size_t> requested, std::size_t points) {
  if (requested) return *requested;
  return std::min(kDefaultClusterCount, points);
}

namespace {

constexpr std::size_t kPointChunk = 256;

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Nearest {
  std::uint32_t cluster;
  double distance;  // squared
};

Nearest nearest_centroid(std::span<const float> x, const std::vector<float>& centroids, std::size_t k,
                         std::size_t dim) {
  Nearest best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t c = 0; c < k; ++c) {
    const double d = squared_distance(x, {centroids.data() + c * dim, dim});
    if (d < best.distance) best = {static_cast<std::uint32_t>(c), d};
  }
  return best;
}

class Lloyd {
 public:
  Lloyd(const FeatureMatrix& points, std::size_t k, std::size_t workers)
      : points_(points), k_(k), dim_(points.dim()), workers_(workers),
        assignment_(points.rows()), distance_(points.rows()) {}

  std::vector<float>& centroids() { return centroids_; }
  const std::vector<std::uint32_t>& assignment() const { return assignment_; }

  void seed_plus_plus(std::uint64_t seed) {
    const std::size_t n = points_.rows();
    std::mt19937_64 rng(seed);
    centroids_.assign(k_ * dim_, 0.0f);
    std::vector<bool> chosen(n, false);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());

    auto take = [&](std::size_t idx, std::size_t c) {
      chosen[idx] = true;
      const auto src = points_.row(idx);
      std::copy(src.begin(), src.end(), centroids_.begin() + c * dim_);
      const std::span<const float> centre(centroids_.data() + c * dim_, dim_);
      parallel_chunks(n, kPointChunk, workers_, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) d2[i] = std::min(d2[i], squared_distance(points_.row(i), centre));
      });
    };

    take(std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * n)), 0);
    for (std::size_t c = 1; c < k_; ++c) {
      double total = 0.0;
      for (double d : d2) total += d;
      std::size_t pick = n;
      const double target = uniform01(rng) * total;
      if (total > 0.0) {
        double cumulative = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (d2[i] <= 0.0) continue;
          cumulative += d2[i];
          pick = i;
          if (cumulative > target) break;
        }
      }
      if (pick == n) {
        // Every point coincides with a chosen centre; take the first unused.
        pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
      }
      take(pick, c);
    }
  }

  // Assigns every point to its nearest centroid, repairing empty clusters.
  // Returns the inertia of the resulting assignment.
  double assign_all() {
    assign_pass();
    for (std::size_t round = 0; round < k_; ++round) {
      if (!repair_empty()) break;
      assign_pass();
    }
    double inertia = 0.0;
    for (double d : distance_) inertia += d;
    return inertia;
  }

  void update_centroids() {
    std::vector<std::vector<std::uint32_t>> members(k_);
    for (std::size_t i = 0; i < assignment_.size(); ++i) {
      members[assignment_[i]].push_back(static_cast<std::uint32_t>(i));
    }
    parallel_chunks(k_, 1, workers_, [&](std::size_t b, std::size_t e) {
      std::vector<double> sum(dim_);
      for (std::size_t c = b; c < e; ++c) {
        if (members[c].empty()) continue;
        std::fill(sum.begin(), sum.end(), 0.0);
        for (std::uint32_t i : members[c]) {
          const auto x = points_.row(i);
          for (std::size_t d = 0; d < dim_; ++d) sum[d] += x[d];
        }
        const double inv = 1.0 / static_cast<double>(members[c].size());
        for (std::size_t d = 0; d < dim_; ++d) {
          centroids_[c * dim_ + d] = static_cast<float>(sum[d] * inv);
        }
      }
    });
  }

 private:
  void assign_pass() {
    parallel_chunks(points_.rows(), kPointChunk, workers_, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        const Nearest n = nearest_centroid(points_.row(i), centroids_, k_, dim_);
        assignment_[i] = n.cluster;
        distance_[i] = n.distance;
      }
    });
  }

  // Moves each empty cluster's centroid onto the point farthest from its
  // current centroid (taken only from clusters with more than one member).
  // Returns false when nothing was empty or nothing could be moved.
  bool repair_empty() {
    std::vector<std::size_t> counts(k_, 0);
    for (auto a : assignment_) ++counts[a];
    bool moved = false;
    for (std::size_t c = 0; c < k_; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = assignment_.size();
      double far_d = 0.0;
      for (std::size_t i = 0; i < assignment_.size(); ++i) {
        if (counts[assignment_[i]] > 1 && distance_[i] > far_d) {
          far = i;
          far_d = distance_[i];
        }
      }
      if (far == assignment_.size()) break;
      const auto src = points_.row(far);
      std::copy(src.begin(), src.end(), centroids_.begin() + c * dim_);
      --counts[assignment_[far]];
      ++counts[c];
      assignment_[far] = static_cast<std::uint32_t>(c);
      distance_[far] = 0.0;
      moved = true;
    }
    return moved;
  }

  const FeatureMatrix& points_;
  std::size_t k_;
  std::size_t dim_;
  std::size_t workers_;
  std::vector<float> centroids_;
  std::vector<std::uint32_t> assignment_;
  std::vector<double> distance_;
};

}  // namespace

ClusterModel kmeans_fit(const FeatureMatrix& vectors, const FitOptions& options) {
  const std::size_t n = vectors.rows();
  if (options.k == 0) throw ValidationError("k must be at least 1");
  if (vectors.dim() == 0) throw ValidationError("vectors have zero dimension");
  if (options.k > n) {
    throw ValidationError("k=" + std::to_string(options.k) + " exceeds the number of points (" +
                          std::to_string(n) + ")");
  }
  if (options.k > std::numeric_limits<std::uint32_t>::max()) throw ValidationError("k too large");

  // Canonical row order by ordinal makes the fit independent of input order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return vectors.ordinal(a) < vectors.ordinal(b); });
  FeatureMatrix points(vectors.dim());
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && vectors.ordinal(order[i]) == vectors.ordinal(order[i - 1])) {
      throw ValidationError("duplicate ordinal " + std::to_string(vectors.ordinal(order[i])));
    }
    points.append(vectors.ordinal(order[i]), vectors.row(order[i]));
  }

  Lloyd lloyd(points, options.k, options.workers);
  lloyd.seed_plus_plus(options.seed);

  ClusterModel model;
  model.k = options.k;
  model.dim = points.dim();
  model.seed = options.seed;
  double inertia = lloyd.assign_all();
  model.inertia_history.push_back(inertia);
  while (model.iterations_run < options.max_iters) {
    lloyd.update_centroids();
    ++model.iterations_run;
    const double previous = inertia;
    inertia = lloyd.assign_all();
    model.inertia_history.push_back(inertia);
    if (previous <= 0.0 || (previous - inertia) < options.tol * previous) break;
  }

  model.inertia = inertia;
  model.centroids = std::move(lloyd.centroids());
  model.ordinals = points.ordinals();
  model.assignments = lloyd.assignment();
  return model;
}

std::uint32_t assign(const ClusterModel& model, std::span<const float> vector) {
  if (vector.size() != model.dim) {
    throw ValidationError("vector dim " + std::to_string(vector.size()) + " does not match model dim " +
                          std::to_string(model.dim));
  }
  if (model.k == 0) throw ValidationError("model has no centroids");
  return nearest_centroid(vector, model.centroids, model.k, model.dim).cluster;
}

double compute_inertia(const ClusterModel& model, const FeatureMatrix& vectors) {
  double total = 0.0;
  for (std::size_t i = 0; i < vectors.rows(); ++i) {
    const auto c = model.cluster_of(vectors.ordinal(i));
    if (!c) throw ValidationError("ordinal " + std::to_string(vectors.ordinal(i)) + " not in model");
    total += squared_distance(vectors.row(i), model.centroid(*c));
  }
  return total;
}

}  // namespace imgclust::kmeans
