#include "imgclust/embedding/batch.hpp"

#include <cmath>

#include "imgclust/common/errors.hpp"
#include "imgclust/common/parallel.hpp"

namespace imgclust::embedding {

void BatchResult::merge(BatchResult&& other) {
  succeeded.insert(succeeded.end(), std::make_move_iterator(other.succeeded.begin()),
                   std::make_move_iterator(other.succeeded.end()));
  failed.insert(failed.end(), std::make_move_iterator(other.failed.begin()),
                std::make_move_iterator(other.failed.end()));
  attempts += other.attempts;
}

namespace {

// Empty string when the output is acceptable.
std::string check_output(std::span<const EmbedItem> batch, const std::vector<FeatureVector>& out) {
  if (out.size() != batch.size()) return "embedder returned a wrong number of vectors";
  const std::size_t dim = out.empty() ? 0 : out.front().dim();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].image_id != batch[i].image_id) return "embedder returned vectors out of order";
    if (out[i].dim() != dim || dim == 0) return "embedder returned inconsistent dims";
    for (float v : out[i].values) {
      if (!std::isfinite(v)) return "non-finite value in vector for " + out[i].image_id;
    }
  }
  return {};
}

}  // namespace

BatchResult embed_batch_recursive(std::span<const EmbedItem> batch, Embedder& embedder) {
  if (batch.empty()) throw ValidationError("cannot embed an empty batch");

  BatchResult result;
  result.attempts = 1;
  std::string reason;
  try {
    auto vectors = embedder.embed(batch);
    reason = check_output(batch, vectors);
    if (reason.empty()) {
      result.succeeded = std::move(vectors);
      return result;
    }
  } catch (const BatchFailure& e) {
    reason = e.what();
  }

  if (batch.size() == 1) {
    result.failed.push_back({batch.front().image_id, reason});
    return result;
  }
  const std::size_t half = batch.size() / 2;
  result.merge(embed_batch_recursive(batch.first(half), embedder));
  result.merge(embed_batch_recursive(batch.subspan(half), embedder));
  return result;
}

BatchResult embed_in_batches(std::span<const EmbedItem> items, Embedder& embedder,
                             std::size_t batch_size, std::size_t workers) {
  if (batch_size < 1) throw ValidationError("batch size must be at least 1");
  const std::size_t batches = (items.size() + batch_size - 1) / batch_size;
  std::vector<BatchResult> partial(batches);
  parallel_chunks(batches, 1, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      const std::size_t lo = b * batch_size;
      const std::size_t n = std::min(batch_size, items.size() - lo);
      partial[b] = embed_batch_recursive(items.subspan(lo, n), embedder);
    }
  });
  BatchResult all;
  for (auto& p : partial) all.merge(std::move(p));
  return all;
}

}  // namespace imgclust::embedding
