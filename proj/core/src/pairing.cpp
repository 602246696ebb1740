#include "tdp/pairing.hpp"

#include <algorithm>

#include "tdp/errors.hpp"
#include "tdp/hashes.hpp"

namespace tdp::pairing {

namespace {

constexpr std::uint8_t kTagKeyShare = 0x01;
constexpr std::uint8_t kTagChallenge = 0x02;
constexpr std::uint8_t kTagResponse = 0x03;
constexpr std::uint8_t kTagConfirm = 0x04;

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::span<const std::uint8_t> take(std::size_t n) {
    if (data_.size() - pos_ < n) {
      throw EncodingError("pairing message truncated");
    }
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::uint32_t take_u32() {
    auto b = take(4);
    return std::uint32_t(b[0]) << 24 | std::uint32_t(b[1]) << 16 |
           std::uint32_t(b[2]) << 8 | std::uint32_t(b[3]);
  }

  std::string take_string() {
    std::uint32_t len = take_u32();
    auto b = take(len);
    return std::string(b.begin(), b.end());
  }

  Bytes take_blob() {
    std::uint32_t len = take_u32();
    auto b = take(len);
    return Bytes(b.begin(), b.end());
  }

  void expect_end() const {
    if (pos_ != data_.size()) {
      throw EncodingError("pairing message has trailing bytes");
    }
  }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

void put_string(Bytes& out, const std::string& s) {
  put_u32be(out, static_cast<std::uint32_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

void put_blob(Bytes& out, const Bytes& b) {
  put_u32be(out, static_cast<std::uint32_t>(b.size()));
  append(out, b);
}

}  // namespace

Bytes encode_message(const crypto::Group& g, const PairingMessage& msg) {
  Bytes out;
  if (const auto* ks = std::get_if<KeyShare>(&msg)) {
    out.push_back(kTagKeyShare);
    put_string(out, ks->pk.device_id);
    append(out, g.point_encode(ks->pk.p_dev));
    append(out, g.point_encode(ks->pk.r_point));
    append(out, g.point_encode(ks->u));
  } else if (const auto* c = std::get_if<ChallengeMsg>(&msg)) {
    out.push_back(kTagChallenge);
    put_blob(out, c->payload);
  } else if (const auto* r = std::get_if<ResponseMsg>(&msg)) {
    out.push_back(kTagResponse);
    put_blob(out, r->payload);
  } else {
    out.push_back(kTagConfirm);
    put_blob(out, std::get<ConfirmMsg>(msg).payload);
  }
  return out;
}

PairingMessage decode_message(const crypto::Group& g,
                              std::span<const std::uint8_t> data) {
  Reader rd(data);
  std::uint8_t tag = rd.take(1)[0];
  switch (tag) {
    case kTagKeyShare: {
      KeyShare ks;
      ks.pk.device_id = rd.take_string();
      // Non-identity points are expected here, so fixed-width reads work;
      // an identity (1-byte) encoding shifts the frame and fails decode.
      ks.pk.p_dev = g.point_decode(rd.take(g.point_width()));
      ks.pk.r_point = g.point_decode(rd.take(g.point_width()));
      ks.u = g.point_decode(rd.take(g.point_width()));
      rd.expect_end();
      return ks;
    }
    case kTagChallenge: {
      ChallengeMsg c{rd.take_blob()};
      rd.expect_end();
      return c;
    }
    case kTagResponse: {
      ResponseMsg r{rd.take_blob()};
      rd.expect_end();
      return r;
    }
    case kTagConfirm: {
      ConfirmMsg m{rd.take_blob()};
      rd.expect_end();
      return m;
    }
    default:
      throw EncodingError("pairing message: unknown tag");
  }
}

const char* to_string(SessionState s) {
  switch (s) {
    case SessionState::Init: return "init";
    case SessionState::KeyDerived: return "key-derived";
    case SessionState::ChallengeSent: return "challenge-sent";
    case SessionState::Confirmed: return "confirmed";
    case SessionState::Failed: return "failed";
  }
  return "?";
}

const char* to_string(FailureReason r) {
  switch (r) {
    case FailureReason::None: return "none";
    case FailureReason::AuthFailure: return "auth-failure";
    case FailureReason::NonceMismatch: return "nonce-mismatch";
    case FailureReason::InvalidPeerKey: return "invalid-peer-key";
    case FailureReason::Timeout: return "timeout";
  }
  return "?";
}

PairingSession::PairingSession(const cred::SystemParams& sys,
                               const cred::Credential& self, Role role,
                               Rng& rng, std::uint64_t timeout_ticks)
    : sys_(sys),
      self_(self),
      role_(role),
      l_(sys.group.scalar_random(rng)),
      u_(sys.group.mul_gen(l_)),
      nonce_(rng.u64()),
      timeout_ticks_(timeout_ticks) {}

KeyShare PairingSession::key_share() const {
  return KeyShare{cred::public_part(self_), u_};
}

void PairingSession::fail(FailureReason reason) {
  state_ = SessionState::Failed;
  failure_ = reason;
}

void PairingSession::require(bool cond, const char* what) const {
  if (!cond) {
    throw StateError(std::string("pairing session: ") + what + " (state " +
                     to_string(state_) + ")");
  }
}

void PairingSession::receive_key_share(const KeyShare& peer) {
  require(state_ == SessionState::Init, "key share not expected now");
  const crypto::Group& g = sys_.group;

  auto bad = [&](const char* why) {
    fail(FailureReason::InvalidPeerKey);
    throw InvalidPeerKey(std::string("receive_key_share: ") + why);
  };
  if (peer.pk.device_id == self_.device_id) bad("self pairing");
  if (peer.pk.device_id.empty()) bad("empty peer id");
  for (const crypto::Point* p : {&peer.pk.p_dev, &peer.pk.r_point, &peer.u}) {
    if (g.is_identity(*p) || !g.on_curve(*p)) bad("point not in the group");
  }

  // V computed with our ephemeral against the peer's combined public key,
  // and the peer's ephemeral against our combined private key. Both sides
  // obtain the same two points.
  crypto::Point q_peer = cred::combined_public_key(sys_, peer.pk);
  crypto::Point v_mine = g.mul(l_, q_peer);
  crypto::Point v_theirs = g.mul(g.scalar_add(self_.d, self_.x_dev), peer.u);
  if (g.is_identity(v_mine) || g.is_identity(v_theirs)) {
    bad("degenerate shared point");
  }

  const bool self_first = self_.device_id < peer.pk.device_id;
  const std::string& id_lo = self_first ? self_.device_id : peer.pk.device_id;
  const std::string& id_hi = self_first ? peer.pk.device_id : self_.device_id;
  const crypto::Point& v_lo = self_first ? v_mine : v_theirs;
  const crypto::Point& v_hi = self_first ? v_theirs : v_mine;

  Transcript t;
  t.add(id_lo).add(id_hi).add(g.point_encode(v_lo)).add(g.point_encode(v_hi));
  key_ = crypto::hash_h1(t.data());
  peer_ = peer.pk;
  state_ = SessionState::KeyDerived;
}

ChallengeMsg PairingSession::make_challenge(Rng& rng) {
  require(role_ == Role::Initiator, "only the initiator challenges");
  require(state_ == SessionState::KeyDerived, "challenge needs a derived key");
  ChallengeMsg c{crypto::aead_encrypt(key_, u64be(nonce_), rng)};
  state_ = SessionState::ChallengeSent;
  return c;
}

std::optional<ResponseMsg> PairingSession::answer_challenge(
    const ChallengeMsg& c, Rng& rng) {
  require(role_ == Role::Responder, "only the responder answers");
  require(state_ == SessionState::KeyDerived, "challenge arrived early");
  auto plain = crypto::aead_decrypt(key_, c.payload);
  if (!plain || plain->size() != 8) {
    fail(FailureReason::AuthFailure);
    return std::nullopt;
  }
  std::uint64_t n_peer = read_u64be(*plain);
  Bytes reply = u64be(n_peer + 1);
  put_u64be(reply, nonce_);
  ResponseMsg r{crypto::aead_encrypt(key_, reply, rng)};
  state_ = SessionState::ChallengeSent;
  return r;
}

std::optional<ConfirmMsg> PairingSession::check_response(const ResponseMsg& r,
                                                         Rng& rng) {
  require(role_ == Role::Initiator, "only the initiator checks responses");
  require(state_ == SessionState::ChallengeSent, "no challenge in flight");
  auto plain = crypto::aead_decrypt(key_, r.payload);
  if (!plain || plain->size() != 16) {
    fail(FailureReason::AuthFailure);
    return std::nullopt;
  }
  std::uint64_t echoed = read_u64be({plain->data(), 8});
  if (echoed != nonce_ + 1) {
    fail(FailureReason::NonceMismatch);
    return std::nullopt;
  }
  std::uint64_t n_peer = read_u64be({plain->data() + 8, 8});
  ConfirmMsg m{crypto::aead_encrypt(key_, u64be(n_peer + 1), rng)};
  state_ = SessionState::Confirmed;
  return m;
}

bool PairingSession::accept_confirm(const ConfirmMsg& m) {
  require(role_ == Role::Responder, "only the responder accepts confirms");
  require(state_ == SessionState::ChallengeSent, "no response in flight");
  auto plain = crypto::aead_decrypt(key_, m.payload);
  if (!plain || plain->size() != 8) {
    fail(FailureReason::AuthFailure);
    return false;
  }
  if (read_u64be(*plain) != nonce_ + 1) {
    fail(FailureReason::NonceMismatch);
    return false;
  }
  state_ = SessionState::Confirmed;
  return true;
}

void PairingSession::tick(std::uint64_t n) {
  if (state_ == SessionState::Confirmed || state_ == SessionState::Failed) {
    return;
  }
  elapsed_ += n;
  if (timeout_ticks_ > 0 && elapsed_ >= timeout_ticks_) {
    fail(FailureReason::Timeout);
  }
}

const Bytes& PairingSession::session_key() const {
  if (key_.empty() || state_ == SessionState::Failed) {
    throw StateError("session_key: no established key");
  }
  return key_;
}

const cred::PublicCredential& PairingSession::peer_credential() const {
  if (peer_.device_id.empty() || state_ == SessionState::Failed) {
    throw StateError("peer_credential: no peer bound");
  }
  return peer_;
}

std::string select_peer(const cred::SystemParams& sys,
                        const std::vector<PeerCandidate>& candidates,
                        std::size_t task_index) {
  const PeerCandidate* best = nullptr;
  for (const PeerCandidate& c : candidates) {
    if (task_index >= c.trustvalue.size()) continue;
    if (!verify_trust_attestation(sys, c.pk.r_point, c.trustvalue,
                                  c.attestation)) {
      continue;
    }
    if (best == nullptr ||
        c.trustvalue[task_index] > best->trustvalue[task_index] ||
        (c.trustvalue[task_index] == best->trustvalue[task_index] &&
         c.pk.device_id < best->pk.device_id)) {
      best = &c;
    }
  }
  if (best == nullptr) {
    throw NoCandidates("select_peer: no candidate with a valid attestation");
  }
  return best->pk.device_id;
}

}  // namespace tdp::pairing
