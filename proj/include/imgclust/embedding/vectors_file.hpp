#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "imgclust/common/errors.hpp"
#include "imgclust/common/feature_matrix.hpp"

namespace imgclust::embedding {

// Layout:
//   "FVEC1\n"
//   "count=<N> dim=<D>\n"
//   N x (uint64 LE ordinal, D x float32 LE)
inline constexpr std::string_view kVectorsMagic = "FVEC1\n";

class VectorsFileError : public ValidationError {
 public:
  VectorsFileError(const std::string& what, std::uint64_t byte_offset,
                   std::optional<std::uint64_t> ordinal = std::nullopt)
      : ValidationError(what + " (byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset),
        ordinal_(ordinal) {}

  std::uint64_t byte_offset() const { return byte_offset_; }
  // Row ordinal for row-level problems such as non-finite values.
  std::optional<std::uint64_t> ordinal() const { return ordinal_; }
  bool non_finite() const { return non_finite_; }
  VectorsFileError& mark_non_finite() {
    non_finite_ = true;
    return *this;
  }

 private:
  std::uint64_t byte_offset_;
  std::optional<std::uint64_t> ordinal_;
  bool non_finite_ = false;
};

std::string encode_vectors(const FeatureMatrix& vectors);
void write_vectors(const std::filesystem::path& path, const FeatureMatrix& vectors);

// Parses and validates: magic, header, exact payload length, unique ordinals,
// finite values. Throws VectorsFileError naming the offending byte offset.
FeatureMatrix decode_vectors(std::string_view bytes);
FeatureMatrix read_vectors(const std::filesystem::path& path);

}  // namespace imgclust::embedding
