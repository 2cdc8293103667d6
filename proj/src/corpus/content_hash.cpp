#include "imgclust/corpus/content_hash.hpp"

#include <openssl/evp.h>

#include <memory>

#include "imgclust/common/errors.hpp"

namespace imgclust::corpus {

std::string_view hash_algorithm_name(HashAlgorithm algo) {
  return algo == HashAlgorithm::md5 ? "md5" : "sha256";
}

HashAlgorithm parse_hash_algorithm(std::string_view name) {
  if (name == "sha256") return HashAlgorithm::sha256;
  if (name == "md5") return HashAlgorithm::md5;
  throw ValidationError("unknown hash algorithm '" + std::string(name) +
                        "' (expected sha256 or md5)");
}

std::string hash_bytes(std::span<const std::uint8_t> bytes, HashAlgorithm algo) {
  const EVP_MD* md = algo == HashAlgorithm::md5 ? EVP_md5() : EVP_sha256();
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                             &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), md, nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw RuntimeFailure("digest computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string hash_string(std::string_view s, HashAlgorithm algo) {
  return hash_bytes({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}, algo);
}

}  // namespace imgclust::corpus
