#include <cstring>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "codecs.hpp"

namespace imgclust::corpus::detail {
namespace {

Raster from_bgr(const cv::Mat& bgr) {
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  Raster out(rgb.cols, rgb.rows);
  for (int y = 0; y < rgb.rows; ++y) {
    std::memcpy(out.at(0, y), rgb.ptr<std::uint8_t>(y), static_cast<std::size_t>(rgb.cols) * 3);
  }
  return out;
}

cv::Mat to_rgb_mat(const Raster& r) {
  // Wraps without copying; callers must not outlive `r`.
  return cv::Mat(r.height, r.width, CV_8UC3, const_cast<std::uint8_t*>(r.rgb.data()));
}

}  // namespace

bool decode_with_opencv(std::span<const std::uint8_t> bytes, Raster& out, std::string& error) {
  try {
    const cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1,
                      const_cast<std::uint8_t*>(bytes.data()));
    const cv::Mat img = cv::imdecode(buf, cv::IMREAD_COLOR);
    if (img.empty()) {
      error = "decoder rejected data";
      return false;
    }
    out = from_bgr(img);
    return true;
  } catch (const cv::Exception& e) {
    error = e.what();
    return false;
  }
}

Raster resize_area(const Raster& src, int width, int height) {
  cv::Mat dst;
  cv::resize(to_rgb_mat(src), dst, cv::Size(width, height), 0, 0, cv::INTER_AREA);
  Raster out(width, height);
  for (int y = 0; y < height; ++y) {
    std::memcpy(out.at(0, y), dst.ptr<std::uint8_t>(y), static_cast<std::size_t>(width) * 3);
  }
  return out;
}

std::vector<std::uint8_t> encode_with_opencv(const Raster& raster, const char* ext, int jpeg_quality) {
  cv::Mat bgr;
  cv::cvtColor(to_rgb_mat(raster), bgr, cv::COLOR_RGB2BGR);
  std::vector<int> params;
  if (std::string(ext) == ".jpg") params = {cv::IMWRITE_JPEG_QUALITY, jpeg_quality};
  std::vector<std::uint8_t> out;
  cv::imencode(ext, bgr, out, params);
  return out;
}

}  // namespace imgclust::corpus::detail
