#include "tdp/trust_signature.hpp"

#include <cmath>

#include "tdp/errors.hpp"

namespace tdp::server {

crypto::Scalar quantize_trust_sum(const crypto::Group& g,
                                  const trust::TrustVector& t) {
  double sum = 0.0;
  for (double v : t) {
    if (!(v >= 0.0) || !(v <= 1.0)) {
      throw DomainError("quantize_trust_sum: trust entry outside [0,1]");
    }
    sum += v;
  }
  // Entries sum to at most dim(), so the scaled value is far below LONG_MAX.
  auto fixed =
      static_cast<long>(std::llround(sum * static_cast<double>(kTrustSumScale)));
  return g.scalar_reduce(mpz_class(fixed));
}

TrustSignature sign_trust_attestation(const crypto::Group& g,
                                      const crypto::Scalar& attestation_key,
                                      const trust::TrustVector& t, Rng& rng) {
  crypto::Scalar s = quantize_trust_sum(g, t);
  if (s.is_zero()) {
    throw DomainError("sign_trust_attestation: zero trust sum");
  }
  crypto::Scalar l = g.scalar_random(rng);
  crypto::Scalar t4 = g.scalar_mul(g.scalar_mul(l, s), attestation_key);
  return TrustSignature{t4, g.mul_gen(l)};
}

bool verify_trust_attestation(const cred::SystemParams& sys,
                              const crypto::Point& r_point,
                              const trust::TrustVector& claimed,
                              const TrustSignature& sig) {
  const crypto::Group& g = sys.group;
  if (!g.on_curve(r_point) || g.is_identity(r_point)) return false;
  if (!g.on_curve(sig.t5) || g.is_identity(sig.t5)) return false;

  crypto::Scalar s;
  try {
    s = quantize_trust_sum(g, claimed);
  } catch (const DomainError&) {
    return false;
  }
  if (s.is_zero()) return false;  // no legitimate signature exists for 0

  crypto::Point lhs = g.mul(sig.t4, g.add(sys.p_pub, r_point));
  crypto::Point rhs = g.mul(s, sig.t5);
  return lhs == rhs;
}

}  // namespace tdp::server
