#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "tdp/bytes.hpp"

namespace tdp {

// Deterministic random stream. All distributions are implemented by hand on
// top of mt19937_64 because the std::*_distribution classes are not required
// to produce identical sequences across standard library implementations,
// and reproducibility from a seed is part of this library's contract.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t u64();
  // Uniform in [0, n). n must be nonzero. Uses rejection so every value is
  // exactly equally likely.
  std::uint64_t below(std::uint64_t n);
  Bytes bytes(std::size_t n);
  // Uniform in [0, 1) with 53 bits of precision.
  double real01();
  double exponential(double rate);
  bool chance(double probability);

  // Independent child stream. The child depends only on this stream's seed
  // and the label, never on how much has been drawn, so reordering draws in
  // one subsystem does not perturb another. Reusing a label reproduces the
  // same child.
  Rng fork(std::string_view label) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace tdp
