#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <string>

#include "tdp/bytes.hpp"
#include "tdp/rng.hpp"

namespace tdp::crypto {

// Scalar in [0, q) for the group order q. Construct through Group so the
// range invariant holds; raw access is for serialization and tests.
class Scalar {
 public:
  Scalar() : v_(0) {}
  explicit Scalar(mpz_class v) : v_(std::move(v)) {}

  const mpz_class& value() const { return v_; }
  bool is_zero() const { return v_ == 0; }

  friend bool operator==(const Scalar&, const Scalar&) = default;

 private:
  mpz_class v_;
};

// Affine point. The default state is the identity (point at infinity).
struct Point {
  mpz_class x{0};
  mpz_class y{0};
  bool infinity = true;

  friend bool operator==(const Point&, const Point&) = default;
};

// Short Weierstrass curve y^2 = x^3 + ax + b over F_p with a prime-order
// group generated by (gx, gy). Cofactor 1 is assumed throughout: a point on
// the curve is automatically in the right subgroup. p must be = 3 mod 4 so
// square roots during point decompression are a single exponentiation.
struct CurveParams {
  std::string name;
  mpz_class p, a, b;
  mpz_class gx, gy;
  mpz_class q;
};

class Group {
 public:
  // Validates the parameters: p and q prime, p = 3 mod 4, generator on the
  // curve, q * G = identity. Throws DomainError when any check fails.
  explicit Group(CurveParams params);

  // 160-bit SECG curve, the default deployment group.
  static Group secp160r1();
  // 199-point toy curve over F_211, small enough for exhaustive tests.
  static Group tiny_test_curve();

  const CurveParams& params() const { return prm_; }
  const std::string& name() const { return prm_.name; }
  const Point& generator() const { return gen_; }

  //
  // scalar field (integers mod q)
  //
  Scalar scalar_zero() const { return Scalar(); }
  Scalar scalar_from_u64(std::uint64_t v) const;
  Scalar scalar_reduce(const mpz_class& v) const;
  // Uniform in [1, q-1] by rejection sampling on whole bit strings.
  Scalar scalar_random(Rng& rng) const;
  Scalar scalar_add(const Scalar& a, const Scalar& b) const;
  Scalar scalar_sub(const Scalar& a, const Scalar& b) const;
  Scalar scalar_mul(const Scalar& a, const Scalar& b) const;
  Scalar scalar_neg(const Scalar& a) const;
  // Throws DomainError for the zero scalar.
  Scalar scalar_inv(const Scalar& a) const;

  // Fixed-width big-endian encoding, scalar_width() bytes.
  Bytes scalar_encode(const Scalar& s) const;
  // Rejects wrong width and values >= q.
  Scalar scalar_decode(std::span<const std::uint8_t> data) const;
  std::size_t scalar_width() const { return scalar_width_; }

  //
  // group operations
  //
  Point identity() const { return Point{}; }
  bool is_identity(const Point& p) const { return p.infinity; }
  // Identity counts as on the curve. With cofactor 1 this is the complete
  // membership test.
  bool on_curve(const Point& p) const;
  Point add(const Point& p, const Point& q) const;
  Point negate(const Point& p) const;
  Point sub(const Point& p, const Point& q) const;
  Point mul(const Scalar& k, const Point& p) const;
  Point mul_gen(const Scalar& k) const { return mul(k, gen_); }

  // SEC1-style compressed encoding: 0x02/0x03 prefix plus the x coordinate,
  // point_width() bytes. The identity encodes as a single 0x00 byte.
  Bytes point_encode(const Point& p) const;
  // Rejects malformed prefixes, wrong widths, x >= p, and x coordinates
  // with no square root (off-curve inputs).
  Point point_decode(std::span<const std::uint8_t> data) const;
  std::size_t point_width() const { return field_width_ + 1; }

 private:
  mpz_class fmod(const mpz_class& v) const;
  mpz_class finv(const mpz_class& v) const;
  mpz_class fsqrt(const mpz_class& v) const;  // p = 3 mod 4 exponentiation

  Point mul_unreduced(const mpz_class& e, const Point& p) const;

  struct Jacobian;
  Jacobian to_jacobian(const Point& p) const;
  Point to_affine(const Jacobian& j) const;
  void jac_double(Jacobian& r, const Jacobian& p) const;
  void jac_add(Jacobian& r, const Jacobian& p, const Jacobian& q) const;

  CurveParams prm_;
  Point gen_;
  std::size_t field_width_ = 0;
  std::size_t scalar_width_ = 0;
};

}  // namespace tdp::crypto
