#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tdp/aead.hpp"
#include "tdp/credentials.hpp"
#include "tdp/rng.hpp"
#include "tdp/trust_signature.hpp"

namespace tdp::pairing {

// One device-to-device pairing runs in four messages:
//
//   initiator                         responder
//     KeyShare  ------------------------>
//        <------------------------ KeyShare
//     Challenge ------------------------>      Enc_k(n_a)
//        <------------------------ Response    Enc_k(n_a + 1, n_b)
//     Confirm   ------------------------>      Enc_k(n_b + 1)
//
// Both sides derive the same key k from the shares alone; the encrypted
// nonce exchange proves to each that the peer actually owns its credential,
// since only the holder of (d, x_dev) can compute k for its identity.

struct KeyShare {
  cred::PublicCredential pk;
  crypto::Point u;  // ephemeral l * P
};

struct ChallengeMsg {
  Bytes payload;
};
struct ResponseMsg {
  Bytes payload;
};
struct ConfirmMsg {
  Bytes payload;
};

using PairingMessage =
    std::variant<KeyShare, ChallengeMsg, ResponseMsg, ConfirmMsg>;

// Tagged wire encoding; decode rejects unknown tags, bad point encodings,
// and trailing bytes with EncodingError.
Bytes encode_message(const crypto::Group& g, const PairingMessage& msg);
PairingMessage decode_message(const crypto::Group& g,
                              std::span<const std::uint8_t> data);

enum class Role { Initiator, Responder };

enum class SessionState { Init, KeyDerived, ChallengeSent, Confirmed, Failed };

enum class FailureReason {
  None,
  AuthFailure,     // undecryptable or malformed ciphertext
  NonceMismatch,   // decrypted fine but the counter is wrong
  InvalidPeerKey,  // peer share rejected before key derivation
  Timeout,
};

const char* to_string(SessionState s);
const char* to_string(FailureReason r);

// Protocol state for one pairing attempt. Calling a step in the wrong state
// or role throws StateError and leaves the session untouched; protocol-level
// failures (bad ciphertexts, wrong nonces) move it to Failed instead and
// record the reason.
class PairingSession {
 public:
  // timeout_ticks = 0 disables the timer; otherwise the session fails with
  // Timeout once that many ticks pass without reaching Confirmed.
  PairingSession(const cred::SystemParams& sys, const cred::Credential& self,
                 Role role, Rng& rng, std::uint64_t timeout_ticks = 0);

  KeyShare key_share() const;

  // Validates the peer share (curve membership, non-identity points, no
  // self-pairing) and derives the session key. Throws InvalidPeerKey on a
  // bad share, which also fails the session.
  void receive_key_share(const KeyShare& peer);

  // initiator only, KeyDerived
  ChallengeMsg make_challenge(Rng& rng);
  // responder only, KeyDerived; nullopt fails the session
  std::optional<ResponseMsg> answer_challenge(const ChallengeMsg& c, Rng& rng);
  // initiator only, ChallengeSent; Confirmed on success
  std::optional<ConfirmMsg> check_response(const ResponseMsg& r, Rng& rng);
  // responder only, ChallengeSent; Confirmed when true
  bool accept_confirm(const ConfirmMsg& m);

  // Advances the session clock; fires the timeout when one is set.
  void tick(std::uint64_t n = 1);

  SessionState state() const { return state_; }
  FailureReason failure() const { return failure_; }
  Role role() const { return role_; }
  const std::string& self_id() const { return self_.device_id; }

  // Both throw StateError before the key share exchange completes.
  const Bytes& session_key() const;
  const cred::PublicCredential& peer_credential() const;

 private:
  void fail(FailureReason reason);
  void require(bool cond, const char* what) const;

  const cred::SystemParams& sys_;
  cred::Credential self_;
  Role role_;
  SessionState state_ = SessionState::Init;
  FailureReason failure_ = FailureReason::None;

  crypto::Scalar l_;        // ephemeral secret
  crypto::Point u_;         // l * P
  std::uint64_t nonce_;     // challenge nonce n_self
  Bytes key_;               // derived session key
  cred::PublicCredential peer_;

  std::uint64_t timeout_ticks_;
  std::uint64_t elapsed_ = 0;
};

// A discovered neighbor advertising its credential, claimed trustvalue, and
// the server attestation backing the claim.
struct PeerCandidate {
  cred::PublicCredential pk;
  trust::TrustVector trustvalue;
  server::TrustSignature attestation;
};

// Picks the pairing peer for a task: drops every candidate whose attestation
// does not verify (or whose trustvalue lacks the task entry), then takes the
// highest trustvalue for that task, breaking ties toward the smaller device
// id. Throws NoCandidates when nobody survives.
std::string select_peer(const cred::SystemParams& sys,
                        const std::vector<PeerCandidate>& candidates,
                        std::size_t task_index);

}  // namespace tdp::pairing
