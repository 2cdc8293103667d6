#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "imgclust/corpus/image_io.hpp"

namespace imgclust::embedding {

inline constexpr std::size_t kDefaultDim = 4096;
inline constexpr std::size_t kDefaultBatchSize = 64;

struct FeatureVector {
  std::string image_id;
  std::vector<float> values;

  std::size_t dim() const { return values.size(); }
  bool operator==(const FeatureVector&) const = default;
};

enum class Backend { reference, external };
enum class Normalization { none, l2 };

std::string_view backend_name(Backend b);
Backend parse_backend(std::string_view name);
std::string_view normalization_name(Normalization n);
Normalization parse_normalization(std::string_view name);

struct EmbedderConfig {
  Backend backend = Backend::reference;
  std::size_t dim = kDefaultDim;
  std::size_t batch_size = kDefaultBatchSize;
  Normalization normalize = Normalization::none;
  std::string external_command;  // used when backend == external

  // Throws ValidationError on dim < 2, batch_size < 1, or an external backend
  // without a command. The reference backend also needs dim % 8 == 0.
  void validate() const;
};

struct EmbedItem {
  std::string image_id;
  std::filesystem::path path;
};

// Thrown by an embedder when a batch as a whole cannot be processed.
class BatchFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Maps a batch of images to one vector per image, in input order. A failure
// anywhere in the batch throws BatchFailure for the whole batch, which is how
// batched model inference behaves. Implementations must be safe to call from
// several threads at once.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<FeatureVector> embed(std::span<const EmbedItem> batch) = 0;
};

// Scales to unit Euclidean norm; zero vectors are left as is.
void l2_normalize(std::span<float> values);

}  // namespace imgclust::embedding
