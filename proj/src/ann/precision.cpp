#include "imgclust/ann/precision.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "imgclust/common/errors.hpp"

namespace imgclust::ann {

double PrecisionReport::mean_precision(std::size_t first, std::size_t last) const {
  if (first < 1 || last < first || last > precision.size()) {
    throw ValidationError("rank range out of bounds");
  }
  double sum = 0.0;
  for (std::size_t r = first; r <= last; ++r) sum += precision[r - 1];
  return sum / static_cast<double>(last - first + 1);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::size_t> sample_rows(std::size_t n, std::size_t sample, std::uint64_t seed) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (sample >= n) return rows;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < sample; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(rows[i], rows[j]);
  }
  rows.resize(sample);
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

PrecisionReport precision_at_k(const FeatureMatrix& vectors, const NeighborIndex& index, std::size_t k,
                               std::size_t query_sample, std::uint64_t seed, double build_seconds) {
  if (k == 0) throw ValidationError("k must be at least 1");
  if (vectors.rows() < 2) throw ValidationError("precision needs at least 2 vectors");
  if (index.size() != vectors.rows()) throw ValidationError("index does not cover the vector set");

  PrecisionReport report;
  report.k = k;
  report.points = vectors.rows();
  report.build_seconds = build_seconds;
  report.similarity_matrix_bytes = similarity_matrix_bytes(vectors.rows());
  report.index_bytes = index.memory_bytes();
  report.precision.assign(k, 0.0);

  const auto rows = sample_rows(vectors.rows(), std::max<std::size_t>(query_sample, 1), seed);
  report.queries = rows.size();

  std::vector<NeighborList> exact, approx;
  exact.reserve(rows.size());
  approx.reserve(rows.size());
  auto t0 = Clock::now();
  for (std::size_t r : rows) exact.push_back(exact_knn(vectors, r, k));
  report.exact_seconds = seconds_since(t0);
  t0 = Clock::now();
  for (std::size_t r : rows) approx.push_back(index.query(vectors, vectors.row(r), k, r));
  report.approx_seconds = seconds_since(t0);

  for (std::size_t q = 0; q < rows.size(); ++q) {
    const auto& truth = exact[q].neighbors;
    const auto& found = approx[q].neighbors;
    std::unordered_set<std::uint64_t> truth_prefix, found_prefix;
    std::size_t overlap = 0;
    for (std::size_t r = 1; r <= k; ++r) {
      // Grow both prefixes by one and update the intersection size.
      if (r <= truth.size()) {
        const auto t = truth[r - 1].index;
        truth_prefix.insert(t);
        if (found_prefix.count(t)) ++overlap;
      }
      if (r <= found.size()) {
        const auto f = found[r - 1].index;
        found_prefix.insert(f);
        if (truth_prefix.count(f)) ++overlap;
      }
      const std::size_t denom = std::min(r, truth.size());
      report.precision[r - 1] += denom == 0 ? 1.0 : static_cast<double>(overlap) / denom;
    }
  }
  for (auto& p : report.precision) p /= static_cast<double>(rows.size());
  return report;
}

std::string precision_csv(const PrecisionReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "# points=%zu queries=%zu k=%zu\n", report.points, report.queries, report.k);
  out << line;
  std::snprintf(line, sizeof line, "# build_seconds=%.6f exact_seconds=%.6f approx_seconds=%.6f\n",
                report.build_seconds, report.exact_seconds, report.approx_seconds);
  out << line;
  out << "# similarity_matrix_bytes=" << report.similarity_matrix_bytes
      << " index_bytes=" << report.index_bytes << '\n';
  out << "rank,precision\n";
  for (std::size_t r = 0; r < report.precision.size(); ++r) {
    std::snprintf(line, sizeof line, "%zu,%.6f\n", r + 1, report.precision[r]);
    out << line;
  }
  return out.str();
}

}  // namespace imgclust::ann
