#include "fixtures.hpp"

#include "imgclust/corpus/content_hash.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <stdexcept>
#include <unistd.h>

namespace fs = std::filesystem;

namespace imgclust::testing {

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("imgclust-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

corpus::Raster noise_raster(int width, int height, std::uint32_t seed) {
  std::mt19937 rng(seed);
  corpus::Raster r(width, height);
  for (auto& v : r.rgb) v = static_cast<std::uint8_t>(rng() & 0xff);
  return r;
}

corpus::Raster themed_raster(int width, int height, int theme, std::uint32_t variant) {
  std::mt19937 theme_rng(static_cast<std::uint32_t>(theme) * 7919u + 17u);
  const int base[3] = {static_cast<int>(theme_rng() % 256), static_cast<int>(theme_rng() % 256),
                       static_cast<int>(theme_rng() % 256)};
  const int period = 3 + static_cast<int>(theme_rng() % 6);
  const int orientation = static_cast<int>(theme_rng() % 4);
  std::mt19937 rng(variant * 2654435761u + static_cast<std::uint32_t>(theme));
  corpus::Raster r(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      int coord = 0;
      switch (orientation) {
        case 0: coord = x; break;
        case 1: coord = y; break;
        case 2: coord = x + y; break;
        default: coord = x - y + height; break;
      }
      const bool stripe = (coord / period) % 2 == 0;
      for (int c = 0; c < 3; ++c) {
        int v = base[c] + (stripe ? 60 : -60) + static_cast<int>(rng() % 11) - 5;
        r.at(x, y)[c] = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
      }
    }
  }
  return r;
}

std::vector<std::uint8_t> encode_gif(const corpus::Raster& raster, bool interlaced) {
  std::map<std::uint32_t, std::uint8_t> palette_index;
  std::vector<std::uint8_t> palette;
  std::vector<std::uint8_t> indices(static_cast<std::size_t>(raster.width) * raster.height);
  for (int y = 0; y < raster.height; ++y) {
    for (int x = 0; x < raster.width; ++x) {
      const auto* p = raster.at(x, y);
      const std::uint32_t key = (p[0] << 16) | (p[1] << 8) | p[2];
      auto it = palette_index.find(key);
      if (it == palette_index.end()) {
        if (palette_index.size() == 256) throw std::runtime_error("too many colours for gif");
        it = palette_index.emplace(key, static_cast<std::uint8_t>(palette_index.size())).first;
        palette.insert(palette.end(), p, p + 3);
      }
      indices[static_cast<std::size_t>(y) * raster.width + x] = it->second;
    }
  }
  palette.resize(256 * 3, 0);

  std::vector<std::uint8_t> out = {'G', 'I', 'F', '8', '9', 'a'};
  auto u16 = [&](int v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
  };
  u16(raster.width);
  u16(raster.height);
  out.push_back(0xF7);  // global table, 256 entries
  out.push_back(0);
  out.push_back(0);
  out.insert(out.end(), palette.begin(), palette.end());
  out.push_back(0x2C);
  u16(0);
  u16(0);
  u16(raster.width);
  u16(raster.height);
  out.push_back(interlaced ? 0x40 : 0x00);
  out.push_back(8);  // min code size

  std::vector<int> rows;
  if (interlaced) {
    for (int y = 0; y < raster.height; y += 8) rows.push_back(y);
    for (int y = 4; y < raster.height; y += 8) rows.push_back(y);
    for (int y = 2; y < raster.height; y += 4) rows.push_back(y);
    for (int y = 1; y < raster.height; y += 2) rows.push_back(y);
  } else {
    for (int y = 0; y < raster.height; ++y) rows.push_back(y);
  }

  // 9-bit codes throughout: a clear code every 250 literals keeps the
  // decoder's table from reaching 512 entries.
  std::vector<std::uint8_t> data;
  std::uint32_t acc = 0;
  int bits = 0;
  auto put = [&](int code) {
    acc |= static_cast<std::uint32_t>(code) << bits;
    bits += 9;
    while (bits >= 8) {
      data.push_back(static_cast<std::uint8_t>(acc & 0xff));
      acc >>= 8;
      bits -= 8;
    }
  };
  int since_clear = 0;
  put(256);
  for (int y : rows) {
    for (int x = 0; x < raster.width; ++x) {
      if (since_clear == 250) {
        put(256);
        since_clear = 0;
      }
      put(indices[static_cast<std::size_t>(y) * raster.width + x]);
      ++since_clear;
    }
  }
  put(257);
  if (bits > 0) data.push_back(static_cast<std::uint8_t>(acc & 0xff));

  for (std::size_t i = 0; i < data.size(); i += 255) {
    const std::size_t n = std::min<std::size_t>(255, data.size() - i);
    out.push_back(static_cast<std::uint8_t>(n));
    out.insert(out.end(), data.begin() + static_cast<std::ptrdiff_t>(i),
               data.begin() + static_cast<std::ptrdiff_t>(i + n));
  }
  out.push_back(0);
  out.push_back(0x3B);
  return out;
}

CorpusFacts build_corpus(const fs::path& root, const CorpusSpec& spec) {
  CorpusFacts facts;
  std::mt19937 rng(spec.seed);
  std::vector<fs::path> uniques;
  for (std::size_t i = 0; i < spec.unique; ++i) {
    const int theme = static_cast<int>(i % static_cast<std::size_t>(spec.themes));
    const auto raster = themed_raster(spec.width, spec.height, theme, spec.seed * 1000003u + static_cast<std::uint32_t>(i));
    const bool jpeg = i % 5 == 4;
    const fs::path path = root / ("theme" + std::to_string(theme)) /
                          ("img" + std::to_string(i) + (jpeg ? ".jpg" : ".png"));
    write_bytes(path, jpeg ? corpus::encode_jpeg(raster) : corpus::encode_png(raster));
    uniques.push_back(path);
  }
  for (std::size_t i = 0; i < spec.duplicate_files && !uniques.empty(); ++i) {
    const fs::path& src = uniques[rng() % uniques.size()];
    fs::path dst = root / "copies" / ("copy" + std::to_string(i) + src.extension().string());
    fs::create_directories(dst.parent_path());
    fs::copy_file(src, dst, fs::copy_options::overwrite_existing);
  }
  for (std::size_t i = 0; i < spec.invalid; ++i) {
    std::vector<std::uint8_t> bytes;
    std::string ext;
    if (i % 2 == 0) {
      const auto png = corpus::encode_png(noise_raster(16, 16, spec.seed + static_cast<std::uint32_t>(i)));
      bytes.assign(png.begin(), png.begin() + static_cast<std::ptrdiff_t>(png.size() / 2));
      ext = ".png";
    } else {
      bytes.resize(64 + i % 7);
      for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
      ext = ".jpg";
    }
    write_bytes(root / "broken" / ("bad" + std::to_string(i) + ext), bytes);
  }
  if (spec.logo_copies > 0) {
    corpus::Raster logo(spec.width, spec.height);
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x) {
        auto* p = logo.at(x, y);
        p[0] = 250;
        p[1] = static_cast<std::uint8_t>((x * 5) % 256);
        p[2] = 10;
      }
    const auto bytes = corpus::encode_png(logo);
    facts.logo_hash = corpus::hash_bytes(bytes, corpus::HashAlgorithm::sha256);
    for (std::size_t i = 0; i < spec.logo_copies; ++i) {
      write_bytes(root / "logos" / ("logo" + std::to_string(i) + ".png"), bytes);
    }
  }
  facts.invalid = spec.invalid;
  facts.valid = spec.unique + spec.duplicate_files + spec.logo_copies;
  facts.files = facts.valid + facts.invalid;
  facts.distinct = spec.unique + (spec.logo_copies > 0 ? 1 : 0);
  return facts;
}

FeatureMatrix uniform_matrix(std::size_t rows, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  FeatureMatrix m(dim);
  m.reserve(rows);
  std::vector<float> row(dim);
  for (std::size_t i = 0; i < rows; ++i) {
    for (auto& v : row) v = u(rng);
    m.append(i, row);
  }
  return m;
}

FeatureMatrix gaussian_matrix(std::size_t rows, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, 1.0f);
  FeatureMatrix m(dim);
  m.reserve(rows);
  std::vector<float> row(dim);
  for (std::size_t i = 0; i < rows; ++i) {
    for (auto& v : row) v = g(rng);
    m.append(i, row);
  }
  return m;
}

}  // namespace imgclust::testing
