#pragma once

// Shared helpers for building on-disk corpora and random vector sets.

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "imgclust/common/feature_matrix.hpp"
#include "imgclust/corpus/image_io.hpp"

namespace imgclust::testing {

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Pseudo-random pixels; distinct seeds give distinct images.
corpus::Raster noise_raster(int width, int height, std::uint32_t seed);

// Images that cluster by theme: a theme-specific base colour and stripe
// orientation, with small per-variant jitter.
corpus::Raster themed_raster(int width, int height, int theme, std::uint32_t variant);

// Uncompressed-style GIF (literal codes, periodic clear) for an image with at
// most 256 distinct colours. Independent of the library decoder.
std::vector<std::uint8_t> encode_gif(const corpus::Raster& raster, bool interlaced = false);

struct CorpusSpec {
  std::size_t unique = 100;          // distinct valid images spread over `themes`
  std::size_t duplicate_files = 0;   // extra byte-identical copies of random uniques
  std::size_t invalid = 0;           // truncated or garbage files with image extensions
  std::size_t logo_copies = 0;       // copies of one extra image, a high-frequency group
  int themes = 5;
  int width = 48;
  int height = 36;
  std::uint32_t seed = 1;
};

struct CorpusFacts {
  std::size_t files = 0;
  std::size_t valid = 0;
  std::size_t invalid = 0;
  std::size_t distinct = 0;  // distinct valid contents
  std::string logo_hash;     // sha256 of the logo bytes, empty without logos
};

// Writes a synthetic corpus under root. Every 5th unique image is a JPEG,
// the rest PNG.
CorpusFacts build_corpus(const std::filesystem::path& root, const CorpusSpec& spec);

FeatureMatrix uniform_matrix(std::size_t rows, std::size_t dim, std::uint64_t seed);
FeatureMatrix gaussian_matrix(std::size_t rows, std::size_t dim, std::uint64_t seed);

}  // namespace imgclust::testing
