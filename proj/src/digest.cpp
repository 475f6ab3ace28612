#include "pairjudge/digest.hpp"

#include <openssl/evp.h>

#include <memory>

#include "pairjudge/error.hpp"

namespace pairjudge {

Sha256Bytes sha256(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx) throw Error(ErrorKind::Io, "EVP_MD_CTX_new failed");
  Sha256Bytes out{};
  unsigned int len = 0;
  if (EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 || len != out.size()) {
    throw Error(ErrorKind::Io, "sha256 digest failed");
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  static constexpr char kHex[] = "0123456789abcdef";
  const auto bytes = sha256(data);
  std::string hex;
  hex.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    hex.push_back(kHex[b >> 4]);
    hex.push_back(kHex[b & 0x0f]);
  }
  return hex;
}

std::string length_prefixed(std::initializer_list<std::string_view> fields) {
  std::string out;
  for (auto field : fields) {
    std::uint64_t n = field.size();
    for (int shift = 56; shift >= 0; shift -= 8) {
      out.push_back(static_cast<char>((n >> shift) & 0xff));
    }
    out.append(field);
  }
  return out;
}

std::string digest_fields(std::initializer_list<std::string_view> fields) {
  return sha256_hex(length_prefixed(fields));
}

}  // namespace pairjudge
