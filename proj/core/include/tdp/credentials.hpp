#pragma once

#include <map>
#include <string>

#include "tdp/group.hpp"
#include "tdp/rng.hpp"

namespace tdp::cred {

// Public system parameters handed to every device at registration: the group
// itself and the authority's public key P_pub = x * P.
struct SystemParams {
  crypto::Group group;
  crypto::Point p_pub;
};

// Key material a device carries after registration. The full private key is
// the pair (d, x_dev): d comes from the authority, x_dev never leaves the
// device. Neither half alone can impersonate the device.
struct Credential {
  std::string device_id;
  crypto::Scalar x_dev;    // self-chosen secret
  crypto::Point p_dev;     // x_dev * P
  crypto::Scalar d;        // authority-issued partial private key
  crypto::Point r_point;   // commitment R folded into d
};

// The shareable part of a credential. Verification works without any
// certificate: d * P can be recomputed from (id, R, P_dev) and P_pub alone.
struct PublicCredential {
  std::string device_id;
  crypto::Point p_dev;
  crypto::Point r_point;
};

inline PublicCredential public_part(const Credential& c) {
  return PublicCredential{c.device_id, c.p_dev, c.r_point};
}

// JSON round-trip for distributing public credentials out of band.
std::string export_public_credential(const SystemParams& sys,
                                     const PublicCredential& pc);
PublicCredential import_public_credential(const SystemParams& sys,
                                          const std::string& json_text);

// First registration step, run on the device: pick x_dev and publish
// P_dev = x_dev * P. Returned pair is (x_dev, P_dev).
std::pair<crypto::Scalar, crypto::Point> device_begin_registration(
    const crypto::Group& g, Rng& rng);

// Issues partial private keys. Holds the master secret x; nothing outside
// this class can read it or the per-device commitment randomness.
class KeyAuthority {
 public:
  KeyAuthority(crypto::Group group, Rng& rng);

  const SystemParams& params() const { return sys_; }

  struct Issue {
    crypto::Point r_point;  // R = r * P
    crypto::Scalar d;       // d = r + x * h0(id, R, P_dev) mod q
  };

  // Registers the device and returns its partial key. A device id can be
  // registered once; repeats throw DuplicateRegistration. Off-curve or
  // identity P_dev throws InvalidPeerKey, and the rare degenerate draw where
  // d or d*P collapses to zero/identity is rejected with DegenerateKey.
  Issue extract_partial_key(const std::string& device_id,
                            const crypto::Point& p_dev, Rng& rng);

  bool is_registered(const std::string& device_id) const;
  // Commitment randomness for a registered device. Throws UnknownDevice.
  const crypto::Scalar& registration_secret(const std::string& device_id) const;
  const crypto::Point& registered_r_point(const std::string& device_id) const;
  // Copy of the partial key handed out at registration; the server side needs
  // it to check transaction receipts and open their sealed ratings.
  const crypto::Scalar& issued_partial_key(const std::string& device_id) const;
  // Per-device trust-attestation factor (x + r)^{-1}. The master secret
  // itself stays inside the class. Throws UnknownDevice, or DegenerateKey in
  // the unrealizable case x + r == 0.
  crypto::Scalar attestation_key(const std::string& device_id) const;

 private:
  SystemParams sys_;
  crypto::Scalar master_x_;
  struct Entry {
    crypto::Scalar r;
    crypto::Point r_point;
    crypto::Scalar d;
  };
  std::map<std::string, Entry> issued_;
};

// Transcript hashed by h0 at extraction and verification:
// (device_id, R, P_dev), each field length-prefixed.
crypto::Scalar binding_hash(const SystemParams& sys, const std::string& id,
                            const crypto::Point& r_point,
                            const crypto::Point& p_dev);

// Checks d * P == R + h0(id, R, P_dev) * P_pub.
bool verify_partial_key(const SystemParams& sys, const std::string& id,
                        const crypto::Point& r_point,
                        const crypto::Point& p_dev, const crypto::Scalar& d);

// (d + x_dev) * P reconstructed purely from public values:
// R + h0(id, R, P_dev) * P_pub + P_dev.
crypto::Point combined_public_key(const SystemParams& sys,
                                  const PublicCredential& pc);

// Runs both halves of registration in one call; convenience for tools,
// tests, and the simulator.
Credential register_device(KeyAuthority& authority,
                           const std::string& device_id, Rng& rng);

}  // namespace tdp::cred
