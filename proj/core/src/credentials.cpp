#include "tdp/credentials.hpp"

#include <nlohmann/json.hpp>

#include "tdp/errors.hpp"
#include "tdp/hashes.hpp"

namespace tdp::cred {

using nlohmann::json;

std::string export_public_credential(const SystemParams& sys,
                                     const PublicCredential& pc) {
  json j;
  j["curve"] = sys.group.name();
  j["device_id"] = pc.device_id;
  j["p_dev"] = hex_encode(sys.group.point_encode(pc.p_dev));
  j["r"] = hex_encode(sys.group.point_encode(pc.r_point));
  return j.dump(2);
}

PublicCredential import_public_credential(const SystemParams& sys,
                                          const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw EncodingError(std::string("credential import: ") + e.what());
  }
  if (!j.is_object() || !j.contains("device_id") || !j.contains("p_dev") ||
      !j.contains("r")) {
    throw EncodingError("credential import: missing field");
  }
  if (j.contains("curve") && j["curve"] != sys.group.name()) {
    throw EncodingError("credential import: curve mismatch");
  }
  PublicCredential pc;
  pc.device_id = j["device_id"].get<std::string>();
  pc.p_dev = sys.group.point_decode(
      hex_decode(j["p_dev"].get<std::string>()));
  pc.r_point = sys.group.point_decode(hex_decode(j["r"].get<std::string>()));
  return pc;
}

std::pair<crypto::Scalar, crypto::Point> device_begin_registration(
    const crypto::Group& g, Rng& rng) {
  crypto::Scalar x = g.scalar_random(rng);
  return {x, g.mul_gen(x)};
}

KeyAuthority::KeyAuthority(crypto::Group group, Rng& rng)
    : sys_{std::move(group), crypto::Point{}} {
  master_x_ = sys_.group.scalar_random(rng);
  sys_.p_pub = sys_.group.mul_gen(master_x_);
}

KeyAuthority::Issue KeyAuthority::extract_partial_key(
    const std::string& device_id, const crypto::Point& p_dev, Rng& rng) {
  if (issued_.contains(device_id)) {
    throw DuplicateRegistration("device already registered: " + device_id);
  }
  const crypto::Group& g = sys_.group;
  if (g.is_identity(p_dev) || !g.on_curve(p_dev)) {
    throw InvalidPeerKey("extract_partial_key: bad device public key");
  }

  crypto::Scalar r = g.scalar_random(rng);
  crypto::Point r_point = g.mul_gen(r);
  crypto::Scalar h = binding_hash(sys_, device_id, r_point, p_dev);
  crypto::Scalar d = g.scalar_add(r, g.scalar_mul(master_x_, h));
  if (d.is_zero() || g.is_identity(g.mul_gen(d))) {
    // q is ~2^160 so this cannot realistically fire, but a zero d would make
    // the device's receipts unverifiable, so refuse rather than issue it.
    throw DegenerateKey("extract_partial_key: degenerate key for " +
                        device_id);
  }

  issued_.emplace(device_id, Entry{r, r_point, d});
  return Issue{std::move(r_point), std::move(d)};
}

bool KeyAuthority::is_registered(const std::string& device_id) const {
  return issued_.contains(device_id);
}

const crypto::Scalar& KeyAuthority::registration_secret(
    const std::string& device_id) const {
  auto it = issued_.find(device_id);
  if (it == issued_.end()) {
    throw UnknownDevice("registration_secret: " + device_id);
  }
  return it->second.r;
}

const crypto::Point& KeyAuthority::registered_r_point(
    const std::string& device_id) const {
  auto it = issued_.find(device_id);
  if (it == issued_.end()) {
    throw UnknownDevice("registered_r_point: " + device_id);
  }
  return it->second.r_point;
}

const crypto::Scalar& KeyAuthority::issued_partial_key(
    const std::string& device_id) const {
  auto it = issued_.find(device_id);
  if (it == issued_.end()) {
    throw UnknownDevice("issued_partial_key: " + device_id);
  }
  return it->second.d;
}

crypto::Scalar KeyAuthority::attestation_key(
    const std::string& device_id) const {
  auto it = issued_.find(device_id);
  if (it == issued_.end()) {
    throw UnknownDevice("attestation_key: " + device_id);
  }
  crypto::Scalar denom = sys_.group.scalar_add(master_x_, it->second.r);
  if (denom.is_zero()) {
    throw DegenerateKey("attestation_key: x + r vanishes for " + device_id);
  }
  return sys_.group.scalar_inv(denom);
}

crypto::Scalar binding_hash(const SystemParams& sys, const std::string& id,
                            const crypto::Point& r_point,
                            const crypto::Point& p_dev) {
  Transcript t;
  t.add(id)
      .add(sys.group.point_encode(r_point))
      .add(sys.group.point_encode(p_dev));
  return crypto::hash_h0(sys.group, t.data());
}

bool verify_partial_key(const SystemParams& sys, const std::string& id,
                        const crypto::Point& r_point,
                        const crypto::Point& p_dev, const crypto::Scalar& d) {
  const crypto::Group& g = sys.group;
  if (!g.on_curve(r_point) || !g.on_curve(p_dev)) return false;
  crypto::Scalar h = binding_hash(sys, id, r_point, p_dev);
  crypto::Point lhs = g.mul_gen(d);
  crypto::Point rhs = g.add(r_point, g.mul(h, sys.p_pub));
  return lhs == rhs;
}

crypto::Point combined_public_key(const SystemParams& sys,
                                  const PublicCredential& pc) {
  const crypto::Group& g = sys.group;
  crypto::Scalar h = binding_hash(sys, pc.device_id, pc.r_point, pc.p_dev);
  return g.add(g.add(pc.r_point, g.mul(h, sys.p_pub)), pc.p_dev);
}

Credential register_device(KeyAuthority& authority, const std::string& device_id,
                           Rng& rng) {
  const crypto::Group& g = authority.params().group;
  auto [x_dev, p_dev] = device_begin_registration(g, rng);
  KeyAuthority::Issue issue =
      authority.extract_partial_key(device_id, p_dev, rng);
  return Credential{device_id, std::move(x_dev), std::move(p_dev),
                    std::move(issue.d), std::move(issue.r_point)};
}

}  // namespace tdp::cred
