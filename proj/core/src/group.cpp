#include "tdp/group.hpp"

#include <utility>

#include "tdp/errors.hpp"

namespace tdp::crypto {

namespace {

mpz_class from_hex(const char* s) { return mpz_class(s, 16); }

std::size_t byte_width(const mpz_class& v) {
  return (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
}

void encode_fixed(Bytes& out, const mpz_class& v, std::size_t width) {
  Bytes tmp(width, 0);
  std::size_t count = 0;
  mpz_export(tmp.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
  // mpz_export writes `count` big-endian bytes from the front; shift them to
  // the tail so the value is left-padded with zeros.
  if (count < width) {
    std::copy_backward(tmp.begin(), tmp.begin() + count, tmp.end());
    std::fill(tmp.begin(), tmp.begin() + (width - count), 0);
  }
  append(out, tmp);
}

mpz_class decode_big_endian(std::span<const std::uint8_t> data) {
  mpz_class v;
  mpz_import(v.get_mpz_t(), data.size(), 1, 1, 1, 0, data.data());
  return v;
}

}  // namespace

struct Group::Jacobian {
  mpz_class X, Y, Z;  // Z = 0 encodes the identity
};

Group::Group(CurveParams params) : prm_(std::move(params)) {
  const mpz_class& p = prm_.p;
  if (mpz_probab_prime_p(p.get_mpz_t(), 30) == 0) {
    throw DomainError("group " + prm_.name + ": p is not prime");
  }
  if (mpz_probab_prime_p(prm_.q.get_mpz_t(), 30) == 0) {
    throw DomainError("group " + prm_.name + ": q is not prime");
  }
  if (p % 4 != 3) {
    throw DomainError("group " + prm_.name + ": p must be 3 mod 4");
  }
  mpz_class disc = 4 * prm_.a * prm_.a * prm_.a + 27 * prm_.b * prm_.b;
  if (disc % p == 0) {
    throw DomainError("group " + prm_.name + ": singular curve");
  }

  field_width_ = byte_width(p);
  scalar_width_ = byte_width(prm_.q);
  gen_ = Point{prm_.gx, prm_.gy, false};
  if (!on_curve(gen_)) {
    throw DomainError("group " + prm_.name + ": generator not on curve");
  }
  // mul() reduces scalars mod q, which would turn q itself into 0 and make
  // this check vacuous, so run the ladder on the raw value.
  if (!is_identity(mul_unreduced(prm_.q, gen_))) {
    throw DomainError("group " + prm_.name + ": q is not the generator order");
  }
}

Group Group::secp160r1() {
  CurveParams prm;
  prm.name = "secp160r1";
  prm.p = from_hex("ffffffffffffffffffffffffffffffff7fffffff");
  prm.a = from_hex("ffffffffffffffffffffffffffffffff7ffffffc");
  prm.b = from_hex("1c97befc54bd7a8b65acf89f81d4d4adc565fa45");
  prm.gx = from_hex("4a96b5688ef573284664698968c38bb913cbfc82");
  prm.gy = from_hex("23a628553168947d59dcc912042351377ac5fb32");
  prm.q = from_hex("0100000000000000000001f4c8f927aed3ca752257");
  return Group(std::move(prm));
}

Group Group::tiny_test_curve() {
  CurveParams prm;
  prm.name = "tiny211";
  prm.p = 211;
  prm.a = 2;
  prm.b = 10;
  prm.gx = 1;
  prm.gy = 60;
  prm.q = 199;
  return Group(std::move(prm));
}

//
// scalar field
//

Scalar Group::scalar_from_u64(std::uint64_t v) const {
  mpz_class m;
  mpz_import(m.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
  return scalar_reduce(m);
}

Scalar Group::scalar_reduce(const mpz_class& v) const {
  mpz_class r = v % prm_.q;
  if (r < 0) r += prm_.q;
  return Scalar(std::move(r));
}

Scalar Group::scalar_random(Rng& rng) const {
  const std::size_t bits = mpz_sizeinbase(prm_.q.get_mpz_t(), 2);
  const std::size_t nbytes = (bits + 7) / 8;
  const unsigned top_mask =
      bits % 8 == 0 ? 0xff : (1u << (bits % 8)) - 1;
  while (true) {
    Bytes buf = rng.bytes(nbytes);
    buf[0] &= static_cast<std::uint8_t>(top_mask);
    mpz_class v = decode_big_endian(buf);
    if (v > 0 && v < prm_.q) return Scalar(std::move(v));
  }
}

Scalar Group::scalar_add(const Scalar& a, const Scalar& b) const {
  return scalar_reduce(a.value() + b.value());
}

Scalar Group::scalar_sub(const Scalar& a, const Scalar& b) const {
  return scalar_reduce(a.value() - b.value());
}

Scalar Group::scalar_mul(const Scalar& a, const Scalar& b) const {
  return scalar_reduce(a.value() * b.value());
}

Scalar Group::scalar_neg(const Scalar& a) const {
  return scalar_reduce(-a.value());
}

Scalar Group::scalar_inv(const Scalar& a) const {
  if (a.is_zero()) throw DomainError("scalar_inv: zero has no inverse");
  mpz_class r;
  if (mpz_invert(r.get_mpz_t(), a.value().get_mpz_t(), prm_.q.get_mpz_t()) ==
      0) {
    throw DomainError("scalar_inv: not invertible");
  }
  return Scalar(std::move(r));
}

Bytes Group::scalar_encode(const Scalar& s) const {
  Bytes out;
  out.reserve(scalar_width_);
  encode_fixed(out, s.value(), scalar_width_);
  return out;
}

Scalar Group::scalar_decode(std::span<const std::uint8_t> data) const {
  if (data.size() != scalar_width_) {
    throw EncodingError("scalar_decode: expected " +
                        std::to_string(scalar_width_) + " bytes, got " +
                        std::to_string(data.size()));
  }
  mpz_class v = decode_big_endian(data);
  if (v >= prm_.q) throw EncodingError("scalar_decode: value out of range");
  return Scalar(std::move(v));
}

//
// field helpers
//

mpz_class Group::fmod(const mpz_class& v) const {
  mpz_class r = v % prm_.p;
  if (r < 0) r += prm_.p;
  return r;
}

mpz_class Group::finv(const mpz_class& v) const {
  mpz_class r;
  if (mpz_invert(r.get_mpz_t(), v.get_mpz_t(), prm_.p.get_mpz_t()) == 0) {
    throw DomainError("field inverse of zero");
  }
  return r;
}

mpz_class Group::fsqrt(const mpz_class& v) const {
  mpz_class e = (prm_.p + 1) / 4;
  mpz_class r;
  mpz_powm(r.get_mpz_t(), v.get_mpz_t(), e.get_mpz_t(), prm_.p.get_mpz_t());
  return r;
}

//
// group operations
//

bool Group::on_curve(const Point& pt) const {
  if (pt.infinity) return true;
  if (pt.x < 0 || pt.x >= prm_.p || pt.y < 0 || pt.y >= prm_.p) return false;
  mpz_class lhs = fmod(pt.y * pt.y);
  mpz_class rhs = fmod(pt.x * pt.x * pt.x + prm_.a * pt.x + prm_.b);
  return lhs == rhs;
}

Point Group::negate(const Point& pt) const {
  if (pt.infinity) return pt;
  return Point{pt.x, fmod(-pt.y), false};
}

Point Group::sub(const Point& p, const Point& q) const {
  return add(p, negate(q));
}

// Affine chord-and-tangent addition. Scalar multiplication below uses
// Jacobian coordinates instead; tests cross-check the two paths.
Point Group::add(const Point& p, const Point& q) const {
  if (p.infinity) return q;
  if (q.infinity) return p;
  mpz_class lambda;
  if (p.x == q.x) {
    if (fmod(p.y + q.y) == 0) return Point{};  // P + (-P)
    // doubling; y != 0 here because otherwise P = -P was caught above
    lambda = fmod((3 * p.x * p.x + prm_.a) * finv(fmod(2 * p.y)));
  } else {
    lambda = fmod((q.y - p.y) * finv(fmod(q.x - p.x)));
  }
  mpz_class x3 = fmod(lambda * lambda - p.x - q.x);
  mpz_class y3 = fmod(lambda * (p.x - x3) - p.y);
  return Point{std::move(x3), std::move(y3), false};
}

Group::Jacobian Group::to_jacobian(const Point& p) const {
  if (p.infinity) return Jacobian{1, 1, 0};
  return Jacobian{p.x, p.y, 1};
}

Point Group::to_affine(const Jacobian& j) const {
  if (j.Z == 0) return Point{};
  mpz_class zi = finv(j.Z);
  mpz_class zi2 = fmod(zi * zi);
  mpz_class x = fmod(j.X * zi2);
  mpz_class y = fmod(j.Y * zi2 * zi);
  return Point{std::move(x), std::move(y), false};
}

void Group::jac_double(Jacobian& r, const Jacobian& p) const {
  if (p.Z == 0 || p.Y == 0) {
    r = Jacobian{1, 1, 0};
    return;
  }
  mpz_class xx = fmod(p.X * p.X);
  mpz_class yy = fmod(p.Y * p.Y);
  mpz_class yyyy = fmod(yy * yy);
  mpz_class zz = fmod(p.Z * p.Z);
  mpz_class s = fmod(2 * ((p.X + yy) * (p.X + yy) - xx - yyyy));
  mpz_class m = fmod(3 * xx + prm_.a * zz * zz);
  mpz_class x3 = fmod(m * m - 2 * s);
  mpz_class y3 = fmod(m * (s - x3) - 8 * yyyy);
  mpz_class z3 = fmod(2 * p.Y * p.Z);
  r = Jacobian{std::move(x3), std::move(y3), std::move(z3)};
}

void Group::jac_add(Jacobian& r, const Jacobian& p, const Jacobian& q) const {
  if (p.Z == 0) {
    r = q;
    return;
  }
  if (q.Z == 0) {
    r = p;
    return;
  }
  mpz_class z1z1 = fmod(p.Z * p.Z);
  mpz_class z2z2 = fmod(q.Z * q.Z);
  mpz_class u1 = fmod(p.X * z2z2);
  mpz_class u2 = fmod(q.X * z1z1);
  mpz_class s1 = fmod(p.Y * q.Z * z2z2);
  mpz_class s2 = fmod(q.Y * p.Z * z1z1);
  mpz_class h = fmod(u2 - u1);
  mpz_class rr = fmod(s2 - s1);
  if (h == 0) {
    if (rr == 0) {
      jac_double(r, p);
    } else {
      r = Jacobian{1, 1, 0};
    }
    return;
  }
  mpz_class hh = fmod(h * h);
  mpz_class hhh = fmod(h * hh);
  mpz_class v = fmod(u1 * hh);
  mpz_class x3 = fmod(rr * rr - hhh - 2 * v);
  mpz_class y3 = fmod(rr * (v - x3) - s1 * hhh);
  mpz_class z3 = fmod(p.Z * q.Z * h);
  r = Jacobian{std::move(x3), std::move(y3), std::move(z3)};
}

Point Group::mul(const Scalar& k, const Point& p) const {
  mpz_class e = k.value() % prm_.q;
  if (e < 0) e += prm_.q;
  return mul_unreduced(e, p);
}

Point Group::mul_unreduced(const mpz_class& e, const Point& p) const {
  if (e == 0 || p.infinity) return Point{};

  Jacobian base = to_jacobian(p);
  Jacobian acc{1, 1, 0};
  const std::size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
  for (std::size_t i = bits; i-- > 0;) {
    jac_double(acc, acc);
    if (mpz_tstbit(e.get_mpz_t(), i)) {
      jac_add(acc, acc, base);
    }
  }
  return to_affine(acc);
}

Bytes Group::point_encode(const Point& p) const {
  if (p.infinity) return Bytes{0x00};
  Bytes out;
  out.reserve(point_width());
  out.push_back(mpz_odd_p(p.y.get_mpz_t()) ? 0x03 : 0x02);
  encode_fixed(out, p.x, field_width_);
  return out;
}

Point Group::point_decode(std::span<const std::uint8_t> data) const {
  if (data.size() == 1 && data[0] == 0x00) return Point{};
  if (data.size() != point_width()) {
    throw EncodingError("point_decode: expected " +
                        std::to_string(point_width()) + " bytes, got " +
                        std::to_string(data.size()));
  }
  if (data[0] != 0x02 && data[0] != 0x03) {
    throw EncodingError("point_decode: bad prefix byte");
  }
  mpz_class x = decode_big_endian(data.subspan(1));
  if (x >= prm_.p) throw EncodingError("point_decode: x out of range");
  mpz_class rhs = fmod(x * x * x + prm_.a * x + prm_.b);
  mpz_class y = fsqrt(rhs);
  if (fmod(y * y) != rhs) {
    throw EncodingError("point_decode: x is not on the curve");
  }
  const bool want_odd = data[0] == 0x03;
  if (mpz_odd_p(y.get_mpz_t()) != (want_odd ? 1 : 0)) {
    y = fmod(-y);
  }
  return Point{std::move(x), std::move(y), false};
}

}  // namespace tdp::crypto
