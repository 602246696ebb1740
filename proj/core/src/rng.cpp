#include "tdp/rng.hpp"

#include <cmath>

#include "tdp/errors.hpp"

namespace tdp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

std::uint64_t Rng::u64() { return engine_(); }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw DomainError("Rng::below: bound must be nonzero");
  if ((n & (n - 1)) == 0) return u64() & (n - 1);
  // Reject draws from the final partial block so the modulus is unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = u64();
  } while (v >= limit);
  return v % n;
}

Bytes Rng::bytes(std::size_t n) {
  Bytes out;
  out.reserve(n);
  while (out.size() < n) {
    std::uint64_t v = u64();
    for (int i = 7; i >= 0 && out.size() < n; --i) {
      out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  return out;
}

double Rng::real01() {
  return static_cast<double>(u64() >> 11) * 0x1.0p-53;
}

double Rng::exponential(double rate) {
  if (rate <= 0.0) throw DomainError("Rng::exponential: rate must be positive");
  double u;
  do {
    u = real01();
  } while (u == 0.0);
  return -std::log(u) / rate;
}

bool Rng::chance(double probability) {
  if (probability <= 0.0) return false;
  if (probability >= 1.0) return true;
  return real01() < probability;
}

Rng Rng::fork(std::string_view label) const {
  // FNV-1a over the label, mixed with the parent seed through splitmix64.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return Rng(splitmix64(seed_ ^ splitmix64(h)));
}

}  // namespace tdp
