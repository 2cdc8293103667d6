#include "imgclust/embedding/embedder.hpp"

#include <cmath>

#include "imgclust/common/errors.hpp"

namespace imgclust::embedding {

std::string_view backend_name(Backend b) { return b == Backend::external ? "external" : "reference"; }

Backend parse_backend(std::string_view name) {
  if (name == "reference") return Backend::reference;
  if (name == "external") return Backend::external;
  throw ValidationError("unknown embedder backend '" + std::string(name) + "'");
}

std::string_view normalization_name(Normalization n) { return n == Normalization::l2 ? "l2" : "none"; }

Normalization parse_normalization(std::string_view name) {
  if (name == "none") return Normalization::none;
  if (name == "l2") return Normalization::l2;
  throw ValidationError("unknown normalization '" + std::string(name) + "'");
}

void EmbedderConfig::validate() const {
  if (dim < 2) throw ValidationError("embedding dim must be at least 2");
  if (batch_size < 1) throw ValidationError("batch size must be at least 1");
  if (backend == Backend::reference && dim % 8 != 0) {
    throw ValidationError("reference embedder needs dim divisible by 8");
  }
  if (backend == Backend::external && external_command.empty()) {
    throw ValidationError("external embedder backend needs a command");
  }
}

void l2_normalize(std::span<float> values) {
  double sq = 0.0;
  for (float v : values) sq += double(v) * v;
  if (sq <= 0.0) return;
  const double inv = 1.0 / std::sqrt(sq);
  for (float& v : values) v = static_cast<float>(v * inv);
}

}  // namespace imgclust::embedding
