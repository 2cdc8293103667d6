#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace imgclust::corpus {

// Interleaved 8-bit RGB pixels, row-major, no padding.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Raster() = default;
  Raster(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, fill) {}

  bool empty() const { return width <= 0 || height <= 0; }
  std::uint8_t* at(int x, int y) {
    return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  const std::uint8_t* at(int x, int y) const {
    return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  bool operator==(const Raster&) const = default;
};

enum class ImageFormat { png, jpeg, gif, bmp, tiff, invalid };

std::string_view format_name(ImageFormat f);
// Identifies the container from magic bytes; invalid when unrecognised.
ImageFormat sniff_format(std::span<const std::uint8_t> bytes);

struct DecodeResult {
  ImageFormat format = ImageFormat::invalid;
  Raster raster;
  std::string error;  // set when format == invalid

  bool ok() const { return format != ImageFormat::invalid; }
};

// Strict decode: truncated or corrupt data is reported as invalid rather than
// returning a partially filled raster. Multi-frame formats yield frame 0.
DecodeResult decode_image(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);

// Decodes a file; throws RuntimeFailure naming the path on failure.
Raster load_image(const std::filesystem::path& path);

// Downscales so the longer edge is at most max_edge (never upscales) and
// encodes as JPEG.
std::vector<std::uint8_t> render_thumbnail(const Raster& raster, int max_edge = 256);

std::vector<std::uint8_t> encode_png(const Raster& raster);
std::vector<std::uint8_t> encode_jpeg(const Raster& raster, int quality = 90);
std::vector<std::uint8_t> encode_bmp(const Raster& raster);

}  // namespace imgclust::corpus
