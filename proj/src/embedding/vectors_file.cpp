#include "imgclust/embedding/vectors_file.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>
#include <unordered_set>

#include "imgclust/common/binary_io.hpp"
#include "imgclust/common/text.hpp"

namespace imgclust::embedding {

std::string encode_vectors(const FeatureMatrix& vectors) {
  std::ostringstream out(std::ios::binary);
  out << kVectorsMagic << "count=" << vectors.rows() << " dim=" << vectors.dim() << '\n';
  for (std::size_t i = 0; i < vectors.rows(); ++i) {
    binary::write_le<std::uint64_t>(out, vectors.ordinal(i));
    for (float v : vectors.row(i)) binary::write_le<float>(out, v);
  }
  return out.str();
}

void write_vectors(const std::filesystem::path& path, const FeatureMatrix& vectors) {
  write_file_atomic(path.string(), encode_vectors(vectors));
}

namespace {

bool parse_field(std::string_view token, std::string_view key, std::uint64_t& value) {
  if (token.substr(0, key.size()) != key) return false;
  token.remove_prefix(key.size());
  if (token.empty()) return false;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  return ec == std::errc() && ptr == token.data() + token.size();
}

template <typename T>
T load_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return binary::to_little(v);
}

}  // namespace

FeatureMatrix decode_vectors(std::string_view bytes) {
  if (bytes.substr(0, kVectorsMagic.size()) != kVectorsMagic) {
    throw VectorsFileError("bad magic, expected FVEC1", 0);
  }
  const std::size_t header_start = kVectorsMagic.size();
  const std::size_t newline = bytes.find('\n', header_start);
  if (newline == std::string_view::npos) {
    throw VectorsFileError("unterminated header line", header_start);
  }
  const std::string_view header = bytes.substr(header_start, newline - header_start);
  const std::size_t space = header.find(' ');
  std::uint64_t count = 0, dim = 0;
  if (space == std::string_view::npos || !parse_field(header.substr(0, space), "count=", count) ||
      !parse_field(header.substr(space + 1), "dim=", dim)) {
    throw VectorsFileError("malformed header, expected 'count=<N> dim=<D>'", header_start);
  }
  if (dim == 0) throw VectorsFileError("dim must be positive", header_start);

  const std::size_t payload = newline + 1;
  const std::uint64_t row_bytes = 8 + 4 * dim;
  const std::uint64_t available = bytes.size() - payload;
  if (available < count * row_bytes) {
    const std::uint64_t complete = available / row_bytes;
    throw VectorsFileError("truncated: header promises " + std::to_string(count) + " rows, found " +
                               std::to_string(complete) + " complete",
                           payload + complete * row_bytes);
  }
  if (available > count * row_bytes) {
    throw VectorsFileError("trailing bytes after last row", payload + count * row_bytes);
  }

  FeatureMatrix m(static_cast<std::size_t>(dim));
  m.reserve(static_cast<std::size_t>(count));
  std::unordered_set<std::uint64_t> seen;
  std::vector<float> row(static_cast<std::size_t>(dim));
  for (std::uint64_t r = 0; r < count; ++r) {
    const std::size_t offset = payload + r * row_bytes;
    const auto ordinal = load_le<std::uint64_t>(bytes.data() + offset);
    if (!seen.insert(ordinal).second) {
      throw VectorsFileError("duplicate ordinal " + std::to_string(ordinal), offset, ordinal);
    }
    for (std::uint64_t d = 0; d < dim; ++d) {
      const std::size_t at = offset + 8 + d * 4;
      row[d] = load_le<float>(bytes.data() + at);
      if (!std::isfinite(row[d])) {
        throw VectorsFileError("non-finite value in row with ordinal " + std::to_string(ordinal), at,
                               ordinal)
            .mark_non_finite();
      }
    }
    m.append(ordinal, row);
  }
  return m;
}

FeatureMatrix read_vectors(const std::filesystem::path& path) {
  const std::string bytes = read_file(path.string());
  return decode_vectors(bytes);
}

}  // namespace imgclust::embedding
