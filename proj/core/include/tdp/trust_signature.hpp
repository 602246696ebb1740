#pragma once

#include <cstdint>

#include "tdp/credentials.hpp"
#include "tdp/group.hpp"
#include "tdp/rng.hpp"
#include "tdp/trust.hpp"

namespace tdp::server {

// Server-issued attestation of a device's trustvalue, verifiable by anyone
// holding the system parameters and the device's registration point R:
//
//   T4 = l * s * (x + r)^{-1}    (a scalar; l fresh per signature)
//   T5 = l * P
//
// where s is the quantized trustvalue sum, x the master secret, and r the
// device's registration randomness. Verification checks
// T4 * (P_pub + R) == s * T5, which holds exactly when the server computed
// T4 over this R with this s.
struct TrustSignature {
  crypto::Scalar t4;
  crypto::Point t5;
};

// Fixed-point scale for trustvalue sums inside signatures. Sums are rounded
// to a micro-unit grid so both sides derive the identical scalar from the
// same doubles.
inline constexpr std::int64_t kTrustSumScale = 1'000'000;

// Sum of the trust entries rounded onto the fixed-point grid.
crypto::Scalar quantize_trust_sum(const crypto::Group& g,
                                  const trust::TrustVector& t);

// Signs the quantized sum of `t` with the device's attestation key
// (x + r)^{-1}, obtained from KeyAuthority::attestation_key. Throws
// DomainError when the sum quantizes to zero: an all-zero trustvalue is
// unattestable, since T4 = 0 would verify against any T5.
TrustSignature sign_trust_attestation(const crypto::Group& g,
                                      const crypto::Scalar& attestation_key,
                                      const trust::TrustVector& t, Rng& rng);

// Checks the claimed trustvalue against the signature and the device's
// registered R. False on any mismatch, never throws for bad signatures.
bool verify_trust_attestation(const cred::SystemParams& sys,
                              const crypto::Point& r_point,
                              const trust::TrustVector& claimed,
                              const TrustSignature& sig);

}  // namespace tdp::server
