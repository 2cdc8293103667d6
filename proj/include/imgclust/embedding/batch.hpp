#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "imgclust/embedding/embedder.hpp"

namespace imgclust::embedding {

struct FailedItem {
  std::string image_id;
  std::string reason;
};

struct BatchResult {
  std::vector<FeatureVector> succeeded;  // input order
  std::vector<FailedItem> failed;        // input order
  std::size_t attempts = 0;              // calls made to Embedder::embed

  void merge(BatchResult&& other);
};

// Tries the whole batch; if the embedder rejects it, splits into halves and
// recurses. A singleton that fails is recorded, not retried. Every input ends
// up in exactly one of succeeded/failed. A batch whose output has the wrong
// shape or non-finite values counts as a failed attempt.
// Throws ValidationError for an empty batch.
BatchResult embed_batch_recursive(std::span<const EmbedItem> batch, Embedder& embedder);

// Splits items into consecutive batches of batch_size and runs
// embed_batch_recursive on each, possibly on several workers. Results are
// assembled in input order regardless of completion order.
BatchResult embed_in_batches(std::span<const EmbedItem> items, Embedder& embedder,
                             std::size_t batch_size, std::size_t workers = 1);

}  // namespace imgclust::embedding
