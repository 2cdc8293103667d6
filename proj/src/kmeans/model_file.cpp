#include "imgclust/kmeans/model_file.hpp"

#include <cstdio>
#include <cstring>
#include <sstream>

#include "imgclust/common/binary_io.hpp"
#include "imgclust/common/errors.hpp"
#include "imgclust/common/text.hpp"

namespace imgclust::kmeans {

std::string encode_model(const ClusterModel& model) {
  std::ostringstream out(std::ios::binary);
  char inertia[64];
  std::snprintf(inertia, sizeof inertia, "%.17g", model.inertia);
  out << "KMEANS1 k=" << model.k << " dim=" << model.dim << " seed=" << model.seed
      << " inertia=" << inertia << '\n';
  for (float v : model.centroids) binary::write_le<float>(out, v);
  out << "assignments count=" << model.ordinals.size() << " iterations=" << model.iterations_run << '\n';
  for (std::size_t i = 0; i < model.ordinals.size(); ++i) {
    binary::write_le<std::uint64_t>(out, model.ordinals[i]);
    binary::write_le<std::uint32_t>(out, model.assignments[i]);
  }
  return out.str();
}

namespace {

std::string_view take_line(std::string_view bytes, std::size_t& pos) {
  const std::size_t nl = bytes.find('\n', pos);
  if (nl == std::string_view::npos) throw ValidationError("model file: unterminated header line");
  const auto line = bytes.substr(pos, nl - pos);
  pos = nl + 1;
  return line;
}

template <typename T>
T load_le(std::string_view bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw ValidationError("model file: truncated");
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return binary::to_little(v);
}

}  // namespace

ClusterModel decode_model(std::string_view bytes) {
  std::size_t pos = 0;
  ClusterModel m;
  {
    const std::string line(take_line(bytes, pos));
    unsigned long long k = 0, dim = 0, seed = 0;
    double inertia = 0.0;
    if (std::sscanf(line.c_str(), "KMEANS1 k=%llu dim=%llu seed=%llu inertia=%lg", &k, &dim, &seed,
                    &inertia) != 4) {
      throw ValidationError("model file: malformed header");
    }
    m.k = k;
    m.dim = dim;
    m.seed = seed;
    m.inertia = inertia;
  }
  if (m.k == 0 || m.dim == 0) throw ValidationError("model file: empty model");
  m.centroids.resize(m.k * m.dim);
  for (auto& v : m.centroids) v = load_le<float>(bytes, pos);
  {
    const std::string line(take_line(bytes, pos));
    unsigned long long count = 0, iterations = 0;
    if (std::sscanf(line.c_str(), "assignments count=%llu iterations=%llu", &count, &iterations) != 2) {
      throw ValidationError("model file: malformed assignments header");
    }
    m.iterations_run = iterations;
    m.ordinals.resize(count);
    m.assignments.resize(count);
  }
  for (std::size_t i = 0; i < m.ordinals.size(); ++i) {
    m.ordinals[i] = load_le<std::uint64_t>(bytes, pos);
    m.assignments[i] = load_le<std::uint32_t>(bytes, pos);
    if (m.assignments[i] >= m.k) throw ValidationError("model file: cluster index out of range");
    if (i > 0 && m.ordinals[i] <= m.ordinals[i - 1]) {
      throw ValidationError("model file: ordinals must be strictly increasing");
    }
  }
  if (pos != bytes.size()) throw ValidationError("model file: trailing bytes");
  return m;
}

void write_model(const std::filesystem::path& path, const ClusterModel& model) {
  write_file_atomic(path.string(), encode_model(model));
}

ClusterModel read_model(const std::filesystem::path& path) { return decode_model(read_file(path.string())); }

}  // namespace imgclust::kmeans
