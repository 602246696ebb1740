#pragma once

#include "tdp/bytes.hpp"
#include "tdp/group.hpp"

namespace tdp::crypto {

// The three hash roles, all built on SHA-256 with a one-byte domain prefix
// so outputs of one role can never collide with another:
//   h0: prefix 0x00, digest reduced mod q, mapped to 1 if the reduction
//       lands on 0 (callers need a usable scalar, never zero)
//   h1: prefix 0x01, first 16 bytes of the digest (AES-128 key width)
//   h2: prefix 0x02, reduced like h0

Scalar hash_h0(const Group& g, std::span<const std::uint8_t> data);
Bytes hash_h1(std::span<const std::uint8_t> data);
Scalar hash_h2(const Group& g, std::span<const std::uint8_t> data);

// Raw SHA-256, exposed for tests and checksums.
Bytes sha256(std::span<const std::uint8_t> data);

}  // namespace tdp::crypto
