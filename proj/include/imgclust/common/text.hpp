#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace imgclust {

std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// RFC 4180 field quoting: quotes only when the field needs it.
std::string csv_field(std::string_view s);
// Parses one CSV line into fields (no embedded newlines).
std::vector<std::string> parse_csv_line(std::string_view line);

// UTC wall clock as ISO-8601 with millisecond precision.
std::string utc_timestamp();

// Writes `contents` to `path` via a sibling temp file and rename.
void write_file_atomic(const std::string& path, std::string_view contents);
std::string read_file(const std::string& path);

}  // namespace imgclust
