#pragma once

// Per-format decoders behind decode_image(). Each returns false and fills
// `error` instead of throwing.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "imgclust/corpus/image_io.hpp"

namespace imgclust::corpus::detail {

bool decode_png(std::span<const std::uint8_t> bytes, Raster& out, std::string& error);
bool decode_jpeg(std::span<const std::uint8_t> bytes, Raster& out, std::string& error);
bool decode_gif(std::span<const std::uint8_t> bytes, Raster& out, std::string& error);
// BMP and TIFF go through OpenCV's codecs.
bool decode_with_opencv(std::span<const std::uint8_t> bytes, Raster& out, std::string& error);

Raster resize_area(const Raster& src, int width, int height);
// ext is ".png", ".jpg" or ".bmp".
std::vector<std::uint8_t> encode_with_opencv(const Raster& raster, const char* ext, int jpeg_quality);

}  // namespace imgclust::corpus::detail
