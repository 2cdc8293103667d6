#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace imgclust::corpus {

// sha256 is the default; md5 reproduces the classic MD5HASH tally column.
enum class HashAlgorithm { sha256, md5 };

std::string_view hash_algorithm_name(HashAlgorithm algo);
// Throws ValidationError for anything other than "sha256" or "md5".
HashAlgorithm parse_hash_algorithm(std::string_view name);

// Lowercase hex digest.
std::string hash_bytes(std::span<const std::uint8_t> bytes, HashAlgorithm algo);
std::string hash_string(std::string_view s, HashAlgorithm algo);

}  // namespace imgclust::corpus
