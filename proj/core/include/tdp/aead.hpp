#pragma once

#include <optional>

#include "tdp/bytes.hpp"
#include "tdp/rng.hpp"

namespace tdp::crypto {

// AES-128-GCM with a random 12-byte nonce. The ciphertext blob layout is
// nonce || body || 16-byte tag, so decryption needs nothing but the key.
inline constexpr std::size_t kAeadKeyBytes = 16;
inline constexpr std::size_t kAeadNonceBytes = 12;
inline constexpr std::size_t kAeadTagBytes = 16;

// Throws DomainError when the key is not 16 bytes.
Bytes aead_encrypt(std::span<const std::uint8_t> key,
                   std::span<const std::uint8_t> plaintext, Rng& rng);

// Empty optional on any authentication or framing failure; never throws for
// bad ciphertexts. A wrong-size key still throws, that is a caller bug.
std::optional<Bytes> aead_decrypt(std::span<const std::uint8_t> key,
                                  std::span<const std::uint8_t> blob);

}  // namespace tdp::crypto
