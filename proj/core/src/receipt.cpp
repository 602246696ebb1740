#include "tdp/receipt.hpp"

#include "tdp/errors.hpp"
#include "tdp/hashes.hpp"

namespace tdp::server {

Bytes rating_key(const crypto::Group& g, const crypto::Scalar& d) {
  return crypto::hash_h1(g.scalar_encode(d));
}

Bytes seal_rating(const crypto::Group& g, const crypto::Scalar& d, int rating,
                  Rng& rng) {
  if (rating != 1 && rating != -1) {
    throw DomainError("seal_rating: rating must be +1 or -1");
  }
  Bytes plain{rating == 1 ? std::uint8_t{0x01} : std::uint8_t{0xff}};
  return crypto::aead_encrypt(rating_key(g, d), plain, rng);
}

std::optional<int> open_rating(const crypto::Group& g,
                               const crypto::Scalar& d, const Bytes& blob) {
  std::optional<Bytes> plain = crypto::aead_decrypt(rating_key(g, d), blob);
  if (!plain || plain->size() != 1) return std::nullopt;
  if ((*plain)[0] == 0x01) return 1;
  if ((*plain)[0] == 0xff) return -1;
  return std::nullopt;
}

crypto::Scalar receipt_binding_hash(const crypto::Group& g,
                                    const Receipt& fields) {
  Transcript t;
  t.add(fields.encrypted_rating)
      .add_f64(fields.credibility)
      .add_f64(fields.qos)
      .add_u64(fields.task_index)
      .add_f64(fields.task_value)
      .add_f64(fields.timestamp)
      .add(fields.owner_id)
      .add(fields.counterpart_id)
      .add_u64(fields.owner_is_requester ? 1 : 0)
      .add_u64(fields.txn_index);
  return crypto::hash_h2(g, t.data());
}

Endorsement endorse_receipt(const cred::SystemParams& sys,
                            const cred::Credential& endorser,
                            const cred::PublicCredential& owner,
                            const Receipt& fields, int rating, Rng& rng) {
  if (fields.owner_id != owner.device_id ||
      fields.counterpart_id != endorser.device_id) {
    throw DomainError("endorse_receipt: ids do not match the credentials");
  }
  const crypto::Group& g = sys.group;

  Receipt bound = fields;
  bound.encrypted_rating = seal_rating(g, endorser.d, rating, rng);
  crypto::Scalar h = receipt_binding_hash(g, bound);

  // d_a * P from the owner's public credential alone
  crypto::Scalar h0 =
      cred::binding_hash(sys, owner.device_id, owner.r_point, owner.p_dev);
  crypto::Point owner_key = g.add(owner.r_point, g.mul(h0, sys.p_pub));

  crypto::Scalar lt = g.scalar_random(rng);
  crypto::Point t1 = g.mul(g.scalar_mul(lt, h), owner_key);
  crypto::Point t2 = g.mul_gen(g.scalar_mul(lt, endorser.d));
  return Endorsement{std::move(bound.encrypted_rating), std::move(t1),
                     std::move(t2)};
}

Receipt generate_receipt(const pairing::PairingSession& session,
                         const Receipt& fields, const Endorsement& e) {
  if (session.state() != pairing::SessionState::Confirmed) {
    throw SessionNotConfirmed("generate_receipt: session not confirmed");
  }
  if (fields.owner_id != session.self_id() ||
      fields.counterpart_id != session.peer_credential().device_id) {
    throw DomainError("generate_receipt: ids do not match the session");
  }
  Receipt out = fields;
  out.encrypted_rating = e.encrypted_rating;
  out.t1 = e.t1;
  out.t2 = e.t2;
  return out;
}

}  // namespace tdp::server
