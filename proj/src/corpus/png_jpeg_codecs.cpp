#include <png.h>
// jpeglib.h needs size_t and FILE declared first.
#include <cstdio>
#include <jpeglib.h>
#include <jerror.h>

#include <csetjmp>

#include "codecs.hpp"

namespace imgclust::corpus::detail {

bool decode_png(std::span<const std::uint8_t> bytes, Raster& out, std::string& error) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    error = std::string("png: ") + image.message;
    return false;
  }
  image.format = PNG_FORMAT_RGB;
  if (image.width == 0 || image.height == 0 || image.width > 65535 || image.height > 65535) {
    png_image_free(&image);
    error = "png: unsupported dimensions";
    return false;
  }
  Raster raster(static_cast<int>(image.width), static_cast<int>(image.height));
  if (!png_image_finish_read(&image, nullptr, raster.rgb.data(), 0, nullptr)) {
    error = std::string("png: ") + image.message;
    png_image_free(&image);
    return false;
  }
  out = std::move(raster);
  return true;
}

namespace {

struct StrictJpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  bool truncated = false;
  char message[JMSG_LENGTH_MAX] = {};
};

void jpeg_fail(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<StrictJpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_note(j_common_ptr cinfo, int level) {
  auto* err = reinterpret_cast<StrictJpegError*>(cinfo->err);
  // Warnings have level -1. A premature end of data means the decoder padded
  // the image with grey; that counts as undecodable.
  if (level < 0 && cinfo->err->msg_code == JWRN_JPEG_EOF) err->truncated = true;
}

// libjpeg state lives in a separate frame so setjmp/longjmp never skips the
// destructor of a C++ object.
bool decode_jpeg_raw(std::span<const std::uint8_t> bytes, std::vector<std::uint8_t>& pixels,
                     int& width, int& height, bool& cmyk, StrictJpegError& err) {
  jpeg_decompress_struct cinfo{};
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_fail;
  err.mgr.emit_message = jpeg_note;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cmyk = cinfo.jpeg_color_space == JCS_CMYK || cinfo.jpeg_color_space == JCS_YCCK;
  cinfo.out_color_space = cmyk ? JCS_CMYK : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  const int channels = cinfo.output_components;
  pixels.resize(static_cast<std::size_t>(width) * height * channels);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * channels;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

}  // namespace

bool decode_jpeg(std::span<const std::uint8_t> bytes, Raster& out, std::string& error) {
  StrictJpegError err;
  std::vector<std::uint8_t> pixels;
  int width = 0, height = 0;
  bool cmyk = false;
  if (!decode_jpeg_raw(bytes, pixels, width, height, cmyk, err)) {
    error = std::string("jpeg: ") + err.message;
    return false;
  }
  if (err.truncated) {
    error = "jpeg: premature end of data";
    return false;
  }
  if (width <= 0 || height <= 0) {
    error = "jpeg: zero-sized image";
    return false;
  }
  Raster raster(width, height);
  if (!cmyk) {
    raster.rgb = std::move(pixels);
  } else {
    // Adobe-style inverted CMYK.
    for (std::size_t i = 0, n = static_cast<std::size_t>(width) * height; i < n; ++i) {
      const unsigned k = pixels[i * 4 + 3];
      for (int c = 0; c < 3; ++c) {
        raster.rgb[i * 3 + c] = static_cast<std::uint8_t>(pixels[i * 4 + c] * k / 255);
      }
    }
  }
  out = std::move(raster);
  return true;
}

}  // namespace imgclust::corpus::detail
