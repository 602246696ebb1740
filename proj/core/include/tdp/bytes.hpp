#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tdp {

using Bytes = std::vector<std::uint8_t>;

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

std::string hex_encode(std::span<const std::uint8_t> data);
Bytes hex_decode(std::string_view hex);  // throws EncodingError on odd length / bad digit

inline void append(Bytes& out, std::span<const std::uint8_t> tail) {
  out.insert(out.end(), tail.begin(), tail.end());
}

void put_u32be(Bytes& out, std::uint32_t v);
void put_u64be(Bytes& out, std::uint64_t v);
Bytes u64be(std::uint64_t v);
std::uint64_t read_u64be(std::span<const std::uint8_t> data);  // needs exactly 8 bytes
// IEEE-754 bit pattern, big-endian; gives doubles a canonical byte form for
// hashing (cross-checked by both endorser and verifier).
void put_f64be(Bytes& out, double v);

// Builds hash and cipher inputs from variable-length fields. Every field is
// written as a 4-byte big-endian length followed by the raw bytes, so two
// different field sequences can never serialize to the same buffer.
class Transcript {
 public:
  Transcript& add(std::span<const std::uint8_t> field);
  Transcript& add(std::string_view field);
  Transcript& add_u64(std::uint64_t v);
  Transcript& add_f64(double v);

  const Bytes& data() const { return buf_; }

 private:
  Bytes buf_;
};

}  // namespace tdp
