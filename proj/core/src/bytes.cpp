#include "tdp/bytes.hpp"

#include <bit>

#include "tdp/errors.hpp"

namespace tdp {

namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string hex_encode(std::span<const std::uint8_t> data) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0f]);
  }
  return out;
}

Bytes hex_decode(std::string_view hex) {
  if (hex.size() % 2 != 0) {
    throw EncodingError("hex_decode: odd number of digits");
  }
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = hex_digit(hex[i]);
    int lo = hex_digit(hex[i + 1]);
    if (hi < 0 || lo < 0) {
      throw EncodingError("hex_decode: invalid digit at offset " +
                          std::to_string(i));
    }
    out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
  }
  return out;
}

void put_u32be(Bytes& out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

void put_u64be(Bytes& out, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

Bytes u64be(std::uint64_t v) {
  Bytes out;
  put_u64be(out, v);
  return out;
}

void put_f64be(Bytes& out, double v) {
  put_u64be(out, std::bit_cast<std::uint64_t>(v));
}

std::uint64_t read_u64be(std::span<const std::uint8_t> data) {
  if (data.size() != 8) {
    throw EncodingError("read_u64be: expected 8 bytes, got " +
                        std::to_string(data.size()));
  }
  std::uint64_t v = 0;
  for (std::uint8_t b : data) v = v << 8 | b;
  return v;
}

Transcript& Transcript::add(std::span<const std::uint8_t> field) {
  put_u32be(buf_, static_cast<std::uint32_t>(field.size()));
  append(buf_, field);
  return *this;
}

Transcript& Transcript::add(std::string_view field) {
  put_u32be(buf_, static_cast<std::uint32_t>(field.size()));
  buf_.insert(buf_.end(), field.begin(), field.end());
  return *this;
}

Transcript& Transcript::add_u64(std::uint64_t v) {
  put_u32be(buf_, 8);
  put_u64be(buf_, v);
  return *this;
}

Transcript& Transcript::add_f64(double v) {
  put_u32be(buf_, 8);
  put_f64be(buf_, v);
  return *this;
}

}  // namespace tdp
