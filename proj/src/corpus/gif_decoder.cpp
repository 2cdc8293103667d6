#include <array>
#include <cstring>

#include "codecs.hpp"

namespace imgclust::corpus::detail {
namespace {

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> b) : bytes_(b) {}
  bool has(std::size_t n) const { return pos_ + n <= bytes_.size(); }
  std::uint8_t u8() { return bytes_[pos_++]; }
  std::uint16_t u16() {
    const std::uint16_t v = bytes_[pos_] | (bytes_[pos_ + 1] << 8);
    pos_ += 2;
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

// Concatenates data sub-blocks up to the zero-length terminator.
bool read_sub_blocks(ByteReader& r, std::vector<std::uint8_t>* out) {
  for (;;) {
    if (!r.has(1)) return false;
    const std::uint8_t len = r.u8();
    if (len == 0) return true;
    if (!r.has(len)) return false;
    auto chunk = r.take(len);
    if (out) out->insert(out->end(), chunk.begin(), chunk.end());
  }
}

// Decodes GIF LZW data into exactly `count` colour indices.
bool lzw_decode(std::span<const std::uint8_t> data, int min_code_size,
                std::size_t count, std::vector<std::uint8_t>& indices) {
  constexpr int kMaxCodes = 4096;
  if (min_code_size < 2 || min_code_size > 8) return false;
  const int clear = 1 << min_code_size;
  const int eoi = clear + 1;

  std::array<std::uint16_t, kMaxCodes> prefix{};
  std::array<std::uint8_t, kMaxCodes> suffix{};
  std::array<std::uint8_t, kMaxCodes> first{};
  std::array<std::uint16_t, kMaxCodes> length{};
  for (int i = 0; i < clear; ++i) {
    suffix[i] = static_cast<std::uint8_t>(i);
    first[i] = static_cast<std::uint8_t>(i);
    length[i] = 1;
  }

  int code_size = min_code_size + 1;
  int next = clear + 2;
  int prev = -1;
  std::size_t bitpos = 0;
  const std::size_t total_bits = data.size() * 8;
  std::array<std::uint8_t, kMaxCodes> stack{};

  indices.clear();
  indices.reserve(count);

  auto emit = [&](int code) {
    const int len = length[code];
    int c = code;
    for (int i = len - 1; i >= 0; --i) {
      stack[i] = suffix[c];
      c = prefix[c];
    }
    for (int i = 0; i < len && indices.size() < count; ++i) indices.push_back(stack[i]);
  };

  while (indices.size() < count) {
    if (bitpos + code_size > total_bits) return false;
    int code = 0;
    for (int b = 0; b < code_size; ++b, ++bitpos) {
      code |= ((data[bitpos >> 3] >> (bitpos & 7)) & 1) << b;
    }
    if (code == clear) {
      code_size = min_code_size + 1;
      next = clear + 2;
      prev = -1;
      continue;
    }
    if (code == eoi) break;
    if (prev < 0) {
      if (code >= clear) return false;
      emit(code);
      prev = code;
      continue;
    }
    if (code < next) {
      emit(code);
      if (next < kMaxCodes) {
        prefix[next] = static_cast<std::uint16_t>(prev);
        suffix[next] = first[code];
        first[next] = first[prev];
        length[next] = static_cast<std::uint16_t>(length[prev] + 1);
        ++next;
      }
    } else if (code == next && next < kMaxCodes) {
      prefix[next] = static_cast<std::uint16_t>(prev);
      suffix[next] = first[prev];
      first[next] = first[prev];
      length[next] = static_cast<std::uint16_t>(length[prev] + 1);
      ++next;
      emit(code);
    } else {
      return false;
    }
    prev = code;
    if (next == (1 << code_size) && code_size < 12) ++code_size;
  }
  return indices.size() == count;
}

}  // namespace

bool decode_gif(std::span<const std::uint8_t> bytes, Raster& out, std::string& error) {
  ByteReader r(bytes);
  if (!r.has(13)) {
    error = "gif: truncated header";
    return false;
  }
  auto sig = r.take(6);
  if (std::memcmp(sig.data(), "GIF87a", 6) != 0 && std::memcmp(sig.data(), "GIF89a", 6) != 0) {
    error = "gif: bad signature";
    return false;
  }
  const int width = r.u16();
  const int height = r.u16();
  const std::uint8_t packed = r.u8();
  const std::uint8_t background = r.u8();
  r.u8();  // pixel aspect ratio
  if (width == 0 || height == 0) {
    error = "gif: zero-sized logical screen";
    return false;
  }

  std::vector<std::uint8_t> global_palette;
  if (packed & 0x80) {
    const std::size_t n = std::size_t{2} << (packed & 7);
    if (!r.has(n * 3)) {
      error = "gif: truncated global colour table";
      return false;
    }
    auto p = r.take(n * 3);
    global_palette.assign(p.begin(), p.end());
  }

  out = Raster(width, height);
  if (!global_palette.empty() && background * 3u + 2 < global_palette.size()) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        std::memcpy(out.at(x, y), &global_palette[background * 3u], 3);
      }
    }
  }

  int transparent = -1;
  for (;;) {
    if (!r.has(1)) {
      error = "gif: truncated before image data";
      return false;
    }
    const std::uint8_t block = r.u8();
    if (block == 0x21) {
      if (!r.has(1)) {
        error = "gif: truncated extension";
        return false;
      }
      const std::uint8_t label = r.u8();
      std::vector<std::uint8_t> payload;
      if (!read_sub_blocks(r, &payload)) {
        error = "gif: truncated extension";
        return false;
      }
      if (label == 0xF9 && payload.size() >= 4 && (payload[0] & 1)) {
        transparent = payload[3];
      }
    } else if (block == 0x2C) {
      if (!r.has(9)) {
        error = "gif: truncated image descriptor";
        return false;
      }
      const int left = r.u16();
      const int top = r.u16();
      const int iw = r.u16();
      const int ih = r.u16();
      const std::uint8_t ipacked = r.u8();
      std::vector<std::uint8_t> palette = global_palette;
      if (ipacked & 0x80) {
        const std::size_t n = std::size_t{2} << (ipacked & 7);
        if (!r.has(n * 3)) {
          error = "gif: truncated local colour table";
          return false;
        }
        auto p = r.take(n * 3);
        palette.assign(p.begin(), p.end());
      }
      if (palette.empty()) {
        error = "gif: no colour table";
        return false;
      }
      if (!r.has(1)) {
        error = "gif: truncated image data";
        return false;
      }
      const int min_code_size = r.u8();
      std::vector<std::uint8_t> data;
      if (!read_sub_blocks(r, &data)) {
        error = "gif: truncated image data";
        return false;
      }
      std::vector<std::uint8_t> indices;
      const std::size_t count = static_cast<std::size_t>(iw) * ih;
      if (count == 0 || !lzw_decode(data, min_code_size, count, indices)) {
        error = "gif: corrupt or truncated LZW stream";
        return false;
      }

      std::vector<int> row_order;
      row_order.reserve(ih);
      if (ipacked & 0x40) {
        for (int y = 0; y < ih; y += 8) row_order.push_back(y);
        for (int y = 4; y < ih; y += 8) row_order.push_back(y);
        for (int y = 2; y < ih; y += 4) row_order.push_back(y);
        for (int y = 1; y < ih; y += 2) row_order.push_back(y);
      } else {
        for (int y = 0; y < ih; ++y) row_order.push_back(y);
      }
      for (int row = 0; row < ih; ++row) {
        const int y = top + row_order[row];
        if (y >= height) continue;
        for (int col = 0; col < iw; ++col) {
          const int x = left + col;
          if (x >= width) continue;
          const std::uint8_t idx = indices[static_cast<std::size_t>(row) * iw + col];
          if (idx == transparent) continue;
          if (idx * 3u + 2 >= palette.size()) {
            error = "gif: colour index outside palette";
            return false;
          }
          std::memcpy(out.at(x, y), &palette[idx * 3u], 3);
        }
      }
      return true;
    } else if (block == 0x3B) {
      error = "gif: no image frames";
      return false;
    } else {
      error = "gif: unknown block type";
      return false;
    }
  }
}

}  // namespace imgclust::corpus::detail
