#include "imgclust/corpus/image_io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "codecs.hpp"
#include "imgclust/common/errors.hpp"

namespace imgclust::corpus {

std::string_view format_name(ImageFormat f) {
  switch (f) {
    case ImageFormat::png: return "png";
    case ImageFormat::jpeg: return "jpeg";
    case ImageFormat::gif: return "gif";
    case ImageFormat::bmp: return "bmp";
    case ImageFormat::tiff: return "tiff";
    case ImageFormat::invalid: break;
  }
  return "invalid";
}

ImageFormat sniff_format(std::span<const std::uint8_t> b) {
  auto starts = [&](std::initializer_list<std::uint8_t> magic) {
    return b.size() >= magic.size() && std::equal(magic.begin(), magic.end(), b.begin());
  };
  if (starts({0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A})) return ImageFormat::png;
  if (starts({0xFF, 0xD8, 0xFF})) return ImageFormat::jpeg;
  if (starts({'G', 'I', 'F', '8'})) return ImageFormat::gif;
  if (starts({'B', 'M'})) return ImageFormat::bmp;
  if (starts({'I', 'I', 0x2A, 0x00}) || starts({'M', 'M', 0x00, 0x2A})) return ImageFormat::tiff;
  return ImageFormat::invalid;
}

DecodeResult decode_image(std::span<const std::uint8_t> bytes) {
  DecodeResult result;
  const ImageFormat format = sniff_format(bytes);
  bool ok = false;
  switch (format) {
    case ImageFormat::png: ok = detail::decode_png(bytes, result.raster, result.error); break;
    case ImageFormat::jpeg: ok = detail::decode_jpeg(bytes, result.raster, result.error); break;
    case ImageFormat::gif: ok = detail::decode_gif(bytes, result.raster, result.error); break;
    case ImageFormat::bmp:
    case ImageFormat::tiff:
      ok = detail::decode_with_opencv(bytes, result.raster, result.error);
      break;
    case ImageFormat::invalid:
      result.error = bytes.empty() ? "empty file" : "unrecognised image signature";
      break;
  }
  if (ok && result.raster.empty()) {
    ok = false;
    result.error = "decoded image has no pixels";
  }
  result.format = ok ? format : ImageFormat::invalid;
  if (!ok) result.raster = Raster{};
  return result;
}

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeFailure("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  if (size < 0) throw RuntimeFailure("cannot size " + path.string());
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), size)) {
    throw RuntimeFailure("cannot read " + path.string());
  }
  return bytes;
}

Raster load_image(const std::filesystem::path& path) {
  const auto bytes = read_binary_file(path);
  auto result = decode_image(bytes);
  if (!result.ok()) {
    throw RuntimeFailure("cannot decode image " + path.string() + ": " + result.error);
  }
  return std::move(result.raster);
}

std::vector<std::uint8_t> render_thumbnail(const Raster& raster, int max_edge) {
  if (raster.empty()) throw ValidationError("cannot thumbnail an empty raster");
  const int longest = std::max(raster.width, raster.height);
  if (longest <= max_edge) return encode_jpeg(raster, 85);
  const double scale = static_cast<double>(max_edge) / longest;
  const int w = std::max(1, static_cast<int>(raster.width * scale + 0.5));
  const int h = std::max(1, static_cast<int>(raster.height * scale + 0.5));
  return encode_jpeg(detail::resize_area(raster, w, h), 85);
}

std::vector<std::uint8_t> encode_png(const Raster& raster) {
  return detail::encode_with_opencv(raster, ".png", 0);
}

std::vector<std::uint8_t> encode_jpeg(const Raster& raster, int quality) {
  return detail::encode_with_opencv(raster, ".jpg", quality);
}

std::vector<std::uint8_t> encode_bmp(const Raster& raster) {
  return detail::encode_with_opencv(raster, ".bmp", 0);
}

}  // namespace imgclust::corpus
