#include "tdp/aead.hpp"

#include <openssl/evp.h>

#include <memory>

#include "tdp/errors.hpp"

namespace tdp::crypto {

namespace {

using CtxPtr = std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)>;

CtxPtr make_ctx() {
  CtxPtr ctx(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
  if (!ctx) throw Error("EVP_CIPHER_CTX_new failed");
  return ctx;
}

void check_key(std::span<const std::uint8_t> key) {
  if (key.size() != kAeadKeyBytes) {
    throw DomainError("aead: key must be " + std::to_string(kAeadKeyBytes) +
                      " bytes, got " + std::to_string(key.size()));
  }
}

}  // namespace

Bytes aead_encrypt(std::span<const std::uint8_t> key,
                   std::span<const std::uint8_t> plaintext, Rng& rng) {
  check_key(key);
  Bytes nonce = rng.bytes(kAeadNonceBytes);

  CtxPtr ctx = make_ctx();
  if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.data(),
                         nonce.data()) != 1) {
    throw Error("aead_encrypt: init failed");
  }

  Bytes out = nonce;
  out.resize(kAeadNonceBytes + plaintext.size() + kAeadTagBytes);
  int len = 0;
  if (EVP_EncryptUpdate(ctx.get(), out.data() + kAeadNonceBytes, &len,
                        plaintext.data(),
                        static_cast<int>(plaintext.size())) != 1) {
    throw Error("aead_encrypt: update failed");
  }
  int body_len = len;
  if (EVP_EncryptFinal_ex(ctx.get(), out.data() + kAeadNonceBytes + len,
                          &len) != 1) {
    throw Error("aead_encrypt: final failed");
  }
  body_len += len;
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kAeadTagBytes,
                          out.data() + kAeadNonceBytes + body_len) != 1) {
    throw Error("aead_encrypt: tag extraction failed");
  }
  out.resize(kAeadNonceBytes + body_len + kAeadTagBytes);
  return out;
}

std::optional<Bytes> aead_decrypt(std::span<const std::uint8_t> key,
                                  std::span<const std::uint8_t> blob) {
  check_key(key);
  if (blob.size() < kAeadNonceBytes + kAeadTagBytes) return std::nullopt;

  auto nonce = blob.first(kAeadNonceBytes);
  auto body = blob.subspan(kAeadNonceBytes,
                           blob.size() - kAeadNonceBytes - kAeadTagBytes);
  auto tag = blob.last(kAeadTagBytes);

  CtxPtr ctx = make_ctx();
  if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.data(),
                         nonce.data()) != 1) {
    return std::nullopt;
  }
  Bytes out(body.size());
  int len = 0;
  if (EVP_DecryptUpdate(ctx.get(), out.data(), &len, body.data(),
                        static_cast<int>(body.size())) != 1) {
    return std::nullopt;
  }
  int out_len = len;
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kAeadTagBytes,
                          const_cast<std::uint8_t*>(tag.data())) != 1) {
    return std::nullopt;
  }
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &len) != 1) {
    return std::nullopt;  // tag mismatch
  }
  out_len += len;
  out.resize(out_len);
  return out;
}

}  // namespace tdp::crypto
