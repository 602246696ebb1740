#include "tdp/hashes.hpp"

#include <openssl/evp.h>

#include <memory>

#include "tdp/errors.hpp"

namespace tdp::crypto {

namespace {

constexpr std::size_t kDigestBytes = 32;

Bytes prefixed_digest(std::uint8_t domain, std::span<const std::uint8_t> data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(
      EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), &domain, 1) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1) {
    throw Error("sha256: digest setup failed");
  }
  Bytes out(kDigestBytes);
  unsigned len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 ||
      len != kDigestBytes) {
    throw Error("sha256: digest finalization failed");
  }
  return out;
}

Scalar digest_to_scalar(const Group& g, const Bytes& digest) {
  mpz_class v;
  mpz_import(v.get_mpz_t(), digest.size(), 1, 1, 1, 0, digest.data());
  Scalar s = g.scalar_reduce(v);
  if (s.is_zero()) return g.scalar_from_u64(1);
  return s;
}

}  // namespace

Scalar hash_h0(const Group& g, std::span<const std::uint8_t> data) {
  return digest_to_scalar(g, prefixed_digest(0x00, data));
}

Bytes hash_h1(std::span<const std::uint8_t> data) {
  Bytes digest = prefixed_digest(0x01, data);
  digest.resize(16);
  return digest;
}

Scalar hash_h2(const Group& g, std::span<const std::uint8_t> data) {
  return digest_to_scalar(g, prefixed_digest(0x02, data));
}

Bytes sha256(std::span<const std::uint8_t> data) {
  Bytes out(kDigestBytes);
  unsigned len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(),
                 nullptr) != 1 ||
      len != kDigestBytes) {
    throw Error("sha256: one-shot digest failed");
  }
  return out;
}

}  // namespace tdp::crypto
