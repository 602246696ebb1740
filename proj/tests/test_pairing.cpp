#include <doctest.h>

#include "tdp/errors.hpp"
#include "tdp/pairing.hpp"

using namespace tdp;
using pairing::FailureReason;
using pairing::PairingSession;
using pairing::Role;
using pairing::SessionState;

namespace {

struct TestBed {
  cred::KeyAuthority ka;
  cred::SystemParams sys;
  cred::Credential alice;
  cred::Credential bob;

  explicit TestBed(Rng& rng)
      : ka(crypto::Group::secp160r1(), rng),
        sys(ka.params()),
        alice(cred::register_device(ka, "alice", rng)),
        bob(cred::register_device(ka, "bob", rng)) {}
};

// Push a message through the wire codec, as a real transport would.
template <typename M>
M over_wire(const crypto::Group& g, const M& msg) {
  Bytes wire = pairing::encode_message(g, pairing::PairingMessage(msg));
  return std::get<M>(pairing::decode_message(g, wire));
}

// Runs the full four-message exchange between two live sessions.
void run_handshake(const crypto::Group& g, PairingSession& a,
                   PairingSession& b, Rng& rng) {
  b.receive_key_share(over_wire(g, a.key_share()));
  a.receive_key_share(over_wire(g, b.key_share()));
  auto challenge = a.make_challenge(rng);
  auto response = b.answer_challenge(over_wire(g, challenge), rng);
  REQUIRE(response.has_value());
  auto confirm = a.check_response(over_wire(g, *response), rng);
  REQUIRE(confirm.has_value());
  REQUIRE(b.accept_confirm(over_wire(g, *confirm)));
}

}  // namespace

TEST_CASE("handshake confirms both sides and agrees on one key") {
  Rng rng(1001);
  TestBed t(rng);

  PairingSession a(t.sys, t.alice, Role::Initiator, rng);
  PairingSession b(t.sys, t.bob, Role::Responder, rng);
  run_handshake(t.sys.group, a, b, rng);

  CHECK(a.state() == SessionState::Confirmed);
  CHECK(b.state() == SessionState::Confirmed);
  CHECK(a.session_key() == b.session_key());
  CHECK(a.session_key().size() == crypto::kAeadKeyBytes);
  CHECK(a.peer_credential().device_id == "bob");
  CHECK(b.peer_credential().device_id == "alice");
  CHECK(a.failure() == FailureReason::None);
}

TEST_CASE("key agreement holds across seeds and initiator direction") {
  for (std::uint64_t seed : {7u, 8u, 9u, 10u, 11u, 12u}) {
    Rng rng(seed);
    TestBed t(rng);
    // Alternate who initiates; agreement must not depend on direction.
    bool alice_initiates = seed % 2 == 0;
    PairingSession a(t.sys, t.alice,
                     alice_initiates ? Role::Initiator : Role::Responder, rng);
    PairingSession b(t.sys, t.bob,
                     alice_initiates ? Role::Responder : Role::Initiator, rng);
    a.receive_key_share(b.key_share());
    b.receive_key_share(a.key_share());
    CHECK(a.session_key() == b.session_key());
  }
}

TEST_CASE("each session draws fresh ephemerals and a fresh key") {
  Rng rng(42);
  TestBed t(rng);

  PairingSession a1(t.sys, t.alice, Role::Initiator, rng);
  PairingSession b1(t.sys, t.bob, Role::Responder, rng);
  PairingSession a2(t.sys, t.alice, Role::Initiator, rng);
  PairingSession b2(t.sys, t.bob, Role::Responder, rng);

  CHECK(!(a1.key_share().u == a2.key_share().u));

  a1.receive_key_share(b1.key_share());
  b1.receive_key_share(a1.key_share());
  a2.receive_key_share(b2.key_share());
  b2.receive_key_share(a2.key_share());
  CHECK(a1.session_key() != a2.session_key());
}

TEST_CASE("wire codec round-trips every message type") {
  Rng rng(5);
  TestBed t(rng);
  const crypto::Group& g = t.sys.group;

  PairingSession a(t.sys, t.alice, Role::Initiator, rng);
  pairing::KeyShare ks = over_wire(g, a.key_share());
  CHECK(ks.pk.device_id == "alice");
  CHECK(ks.pk.p_dev == t.alice.p_dev);
  CHECK(ks.pk.r_point == t.alice.r_point);
  CHECK(ks.u == a.key_share().u);

  pairing::ChallengeMsg c{rng.bytes(29)};
  CHECK(over_wire(g, c).payload == c.payload);
  pairing::ResponseMsg r{rng.bytes(37)};
  CHECK(over_wire(g, r).payload == r.payload);
  pairing::ConfirmMsg m{rng.bytes(0)};
  CHECK(over_wire(g, m).payload == m.payload);
}

TEST_CASE("decode rejects malformed frames") {
  Rng rng(6);
  TestBed t(rng);
  const crypto::Group& g = t.sys.group;

  PairingSession a(t.sys, t.alice, Role::Initiator, rng);
  Bytes wire = pairing::encode_message(g, a.key_share());

  SUBCASE("unknown tag") {
    wire[0] = 0x09;
    CHECK_THROWS_AS(pairing::decode_message(g, wire), EncodingError);
  }
  SUBCASE("every truncation fails") {
    for (std::size_t len = 0; len < wire.size(); ++len) {
      CHECK_THROWS_AS(
          pairing::decode_message(g, std::span(wire.data(), len)),
          EncodingError);
    }
  }
  SUBCASE("trailing bytes") {
    wire.push_back(0x00);
    CHECK_THROWS_AS(pairing::decode_message(g, wire), EncodingError);
  }
  SUBCASE("corrupted point") {
    // Last point byte lives at the end of the frame; an invalid x coordinate
    // of all-0xff exceeds the field prime.
    for (std::size_t i = wire.size() - g.point_width() + 1; i < wire.size();
         ++i) {
      wire[i] = 0xff;
    }
    CHECK_THROWS_AS(pairing::decode_message(g, wire), EncodingError);
  }
  SUBCASE("empty input") {
    CHECK_THROWS_AS(pairing::decode_message(g, {}), EncodingError);
  }
}

TEST_CASE("share validation rejects broken peers and fails the session") {
  Rng rng(77);
  TestBed t(rng);
  const crypto::Group& g = t.sys.group;

  SUBCASE("self pairing") {
    PairingSession a(t.sys, t.alice, Role::Initiator, rng);
    CHECK_THROWS_AS(a.receive_key_share(a.key_share()), InvalidPeerKey);
    CHECK(a.state() == SessionState::Failed);
    CHECK(a.failure() == FailureReason::InvalidPeerKey);
  }
  SUBCASE("identity ephemeral") {
    PairingSession a(t.sys, t.alice, Role::Initiator, rng);
    PairingSession b(t.sys, t.bob, Role::Responder, rng);
    pairing::KeyShare share = b.key_share();
    share.u = g.identity();
    CHECK_THROWS_AS(a.receive_key_share(share), InvalidPeerKey);
    CHECK(a.state() == SessionState::Failed);
  }
  SUBCASE("off-curve device key") {
    PairingSession a(t.sys, t.alice, Role::Initiator, rng);
    PairingSession b(t.sys, t.bob, Role::Responder, rng);
    pairing::KeyShare share = b.key_share();
    share.pk.p_dev = crypto::Point{1, 1, false};
    CHECK_THROWS_AS(a.receive_key_share(share), InvalidPeerKey);
    CHECK(a.state() == SessionState::Failed);
  }
  SUBCASE("empty id") {
    PairingSession a(t.sys, t.alice, Role::Initiator, rng);
    PairingSession b(t.sys, t.bob, Role::Responder, rng);
    pairing::KeyShare share = b.key_share();
    share.pk.device_id.clear();
    CHECK_THROWS_AS(a.receive_key_share(share), InvalidPeerKey);
  }
}

TEST_CASE("misuse throws StateError and leaves the session intact") {
  Rng rng(13);
  TestBed t(rng);

  PairingSession a(t.sys, t.alice, Role::Initiator, rng);
  PairingSession b(t.sys, t.bob, Role::Responder, rng);

  // before key derivation
  CHECK_THROWS_AS(a.make_challenge(rng), StateError);
  CHECK_THROWS_AS(a.session_key(), StateError);
  CHECK_THROWS_AS(a.peer_credential(), StateError);
  CHECK(a.state() == SessionState::Init);

  a.receive_key_share(b.key_share());
  b.receive_key_share(a.key_share());

  // responder cannot challenge, initiator cannot answer
  CHECK_THROWS_AS(b.make_challenge(rng), StateError);
  CHECK_THROWS_AS(a.answer_challenge(pairing::ChallengeMsg{}, rng),
                  StateError);
  // a second share is a protocol violation, not a failure
  CHECK_THROWS_AS(a.receive_key_share(b.key_share()), StateError);
  CHECK(a.state() == SessionState::KeyDerived);

  // the session still completes normally afterwards
  auto challenge = a.make_challenge(rng);
  auto response = b.answer_challenge(challenge, rng);
  REQUIRE(response);
  auto confirm = a.check_response(*response, rng);
  REQUIRE(confirm);
  CHECK(b.accept_confirm(*confirm));
  CHECK(a.state() == SessionState::Confirmed);
  CHECK(b.state() == SessionState::Confirmed);
}

TEST_CASE("borrowed credential cannot pass the challenge round") {
  // The adversary presents bob's public credential with her own ephemeral.
  // Validation passes (the share is well-formed) but she cannot compute the
  // session key, so authentication fails at the first encrypted message.
  Rng rng(99);
  TestBed t(rng);
  const crypto::Group& g = t.sys.group;

  PairingSession a(t.sys, t.alice, Role::Initiator, rng);
  crypto::Scalar eve_l = g.scalar_random(rng);
  pairing::KeyShare forged{cred::public_part(t.bob), g.mul_gen(eve_l)};
  a.receive_key_share(forged);
  CHECK(a.state() == SessionState::KeyDerived);

  auto challenge = a.make_challenge(rng);
  (void)challenge;  // eve cannot decrypt it; she answers with a guess
  Bytes guessed_key(crypto::kAeadKeyBytes, 0xee);
  pairing::ResponseMsg fake{
      crypto::aead_encrypt(guessed_key, rng.bytes(16), rng)};
  CHECK(!a.check_response(fake, rng));
  CHECK(a.state() == SessionState::Failed);
  CHECK(a.failure() == FailureReason::AuthFailure);

  // Same failure on the responder side when the adversary initiates.
  PairingSession b(t.sys, t.bob, Role::Responder, rng);
  crypto::Scalar eve_l2 = g.scalar_random(rng);
  pairing::KeyShare forged2{cred::public_part(t.alice), g.mul_gen(eve_l2)};
  b.receive_key_share(forged2);
  pairing::ChallengeMsg fake_challenge{
      crypto::aead_encrypt(guessed_key, rng.bytes(8), rng)};
  CHECK(!b.answer_challenge(fake_challenge, rng));
  CHECK(b.state() == SessionState::Failed);
  CHECK(b.failure() == FailureReason::AuthFailure);
}

TEST_CASE("ephemeral substitution in the middle leaves both sides failed") {
  // A relay forwards the credentials untouched but swaps in its own
  // ephemeral points, hoping to split the session into two halves it knows.
  Rng rng(123);
  TestBed t(rng);
  const crypto::Group& g = t.sys.group;

  PairingSession a(t.sys, t.alice, Role::Initiator, rng);
  PairingSession b(t.sys, t.bob, Role::Responder, rng);

  pairing::KeyShare to_bob = a.key_share();
  to_bob.u = g.mul_gen(g.scalar_random(rng));
  pairing::KeyShare to_alice = b.key_share();
  to_alice.u = g.mul_gen(g.scalar_random(rng));

  a.receive_key_share(to_alice);
  b.receive_key_share(to_bob);
  // The halves disagree, and neither equals a key the relay can derive.
  CHECK(a.session_key() != b.session_key());

  auto challenge = a.make_challenge(rng);
  CHECK(!b.answer_challenge(challenge, rng));
  CHECK(b.state() == SessionState::Failed);
  CHECK(b.failure() == FailureReason::AuthFailure);

  pairing::ResponseMsg forged{crypto::aead_encrypt(
      Bytes(crypto::kAeadKeyBytes, 0xaa), rng.bytes(16), rng)};
  CHECK(!a.check_response(forged, rng));
  CHECK(a.state() == SessionState::Failed);
  CHECK(a.state() != SessionState::Confirmed);
}

TEST_CASE("wrong nonce echo is detected as NonceMismatch") {
  Rng rng(31);
  TestBed t(rng);

  PairingSession a(t.sys, t.alice, Role::Initiator, rng);
  PairingSession b(t.sys, t.bob, Role::Responder, rng);
  a.receive_key_share(b.key_share());
  b.receive_key_share(a.key_share());

  auto challenge = a.make_challenge(rng);
  // A holder of the real key (here: the test) echoing the wrong counter
  // must still be rejected, separating nonce errors from key errors.
  auto plain = crypto::aead_decrypt(a.session_key(), challenge.payload);
  REQUIRE(plain);
  std::uint64_t n_a = read_u64be(*plain);

  Bytes reply = u64be(n_a + 2);  // off by one
  put_u64be(reply, 555);
  pairing::ResponseMsg bad{crypto::aead_encrypt(a.session_key(), reply, rng)};
  CHECK(!a.check_response(bad, rng));
  CHECK(a.failure() == FailureReason::NonceMismatch);

  // and on the responder side, a confirm with the wrong counter
  Rng rng2(32);
  TestBed t2(rng2);
  PairingSession a2(t2.sys, t2.alice, Role::Initiator, rng2);
  PairingSession b2(t2.sys, t2.bob, Role::Responder, rng2);
  a2.receive_key_share(b2.key_share());
  b2.receive_key_share(a2.key_share());
  auto ch2 = a2.make_challenge(rng2);
  auto resp = b2.answer_challenge(ch2, rng2);
  REQUIRE(resp);
  auto resp_plain = crypto::aead_decrypt(b2.session_key(), resp->payload);
  REQUIRE(resp_plain);
  std::uint64_t n_b = read_u64be({resp_plain->data() + 8, 8});
  pairing::ConfirmMsg bad_confirm{
      crypto::aead_encrypt(b2.session_key(), u64be(n_b), rng2)};
  CHECK(!b2.accept_confirm(bad_confirm));
  CHECK(b2.failure() == FailureReason::NonceMismatch);
}

TEST_CASE("undersized response plaintext is an auth failure") {
  Rng rng(57);
  TestBed t(rng);
  PairingSession a(t.sys, t.alice, Role::Initiator, rng);
  PairingSession b(t.sys, t.bob, Role::Responder, rng);
  a.receive_key_share(b.key_share());
  b.receive_key_share(a.key_share());
  (void)a.make_challenge(rng);
  pairing::ResponseMsg small{
      crypto::aead_encrypt(a.session_key(), rng.bytes(8), rng)};
  CHECK(!a.check_response(small, rng));
  CHECK(a.failure() == FailureReason::AuthFailure);
}

TEST_CASE("sessions time out when configured") {
  Rng rng(64);
  TestBed t(rng);

  PairingSession a(t.sys, t.alice, Role::Initiator, rng, 5);
  PairingSession b(t.sys, t.bob, Role::Responder, rng, 5);
  a.receive_key_share(b.key_share());
  a.tick(4);
  CHECK(a.state() == SessionState::KeyDerived);
  a.tick(1);
  CHECK(a.state() == SessionState::Failed);
  CHECK(a.failure() == FailureReason::Timeout);
  CHECK_THROWS_AS(a.make_challenge(rng), StateError);
  CHECK_THROWS_AS(a.session_key(), StateError);

  // a confirmed session ignores the clock
  Rng rng2(65);
  TestBed t2(rng2);
  PairingSession a2(t2.sys, t2.alice, Role::Initiator, rng2, 3);
  PairingSession b2(t2.sys, t2.bob, Role::Responder, rng2, 3);
  run_handshake(t2.sys.group, a2, b2, rng2);
  a2.tick(100);
  CHECK(a2.state() == SessionState::Confirmed);

  // timeout_ticks = 0 disables the timer entirely
  PairingSession c(t2.sys, t2.alice, Role::Initiator, rng2);
  c.tick(1'000'000);
  CHECK(c.state() == SessionState::Init);
}

TEST_CASE("select_peer takes the most trusted verified candidate") {
  Rng rng(500);
  crypto::Group g = crypto::Group::secp160r1();
  crypto::Scalar master = g.scalar_random(rng);
  cred::SystemParams sys{g, g.mul_gen(master)};

  auto make_candidate = [&](const std::string& id,
                            const trust::TrustVector& tv) {
    crypto::Scalar r = g.scalar_random(rng);
    cred::PublicCredential pc{id, g.mul_gen(g.scalar_random(rng)),
                              g.mul_gen(r)};
    crypto::Scalar key = g.scalar_inv(g.scalar_add(master, r));
    server::TrustSignature sig =
        server::sign_trust_attestation(g, key, tv, rng);
    return pairing::PeerCandidate{pc, tv, sig};
  };

  std::vector<pairing::PeerCandidate> cands;
  cands.push_back(make_candidate("carol", {0.6, 0.2}));
  cands.push_back(make_candidate("dave", {0.4, 0.9}));
  cands.push_back(make_candidate("erin", {0.6, 0.5}));

  SUBCASE("argmax per task") {
    CHECK(pairing::select_peer(sys, cands, 0) == "carol");  // tie -> smaller id
    CHECK(pairing::select_peer(sys, cands, 1) == "dave");
  }
  SUBCASE("inflated claims are dropped") {
    cands[1].trustvalue = {0.99, 0.99};  // no longer matches the signature
    CHECK(pairing::select_peer(sys, cands, 1) == "erin");
  }
  SUBCASE("short trust vectors are skipped, not fatal") {
    cands.push_back(make_candidate("frank", {0.95}));
    CHECK(pairing::select_peer(sys, cands, 1) == "dave");
    CHECK(pairing::select_peer(sys, cands, 0) == "frank");
  }
  SUBCASE("nobody verifiable") {
    for (auto& c : cands) c.trustvalue[0] += 0.01;
    CHECK_THROWS_AS(pairing::select_peer(sys, cands, 0), NoCandidates);
    CHECK_THROWS_AS(pairing::select_peer(sys, {}, 0), NoCandidates);
  }
}

TEST_CASE("trust attestations verify honest claims and nothing else") {
  Rng rng(321);
  crypto::Group g = crypto::Group::secp160r1();
  crypto::Scalar master = g.scalar_random(rng);
  cred::SystemParams sys{g, g.mul_gen(master)};
  crypto::Scalar r = g.scalar_random(rng);
  crypto::Point r_point = g.mul_gen(r);
  crypto::Scalar key = g.scalar_inv(g.scalar_add(master, r));

  trust::TrustVector tv{0.37, 0.81, 0.5};
  server::TrustSignature sig = server::sign_trust_attestation(g, key, tv, rng);

  CHECK(server::verify_trust_attestation(sys, r_point, tv, sig));

  SUBCASE("any claim change breaks it") {
    trust::TrustVector inflated = tv;
    inflated[1] += 1e-5;
    CHECK(!server::verify_trust_attestation(sys, r_point, inflated, sig));
    CHECK(!server::verify_trust_attestation(sys, r_point, {0.37, 0.81}, sig));
  }
  SUBCASE("bound to the registration point") {
    crypto::Point other = g.mul_gen(g.scalar_random(rng));
    CHECK(!server::verify_trust_attestation(sys, other, tv, sig));
  }
  SUBCASE("tampered signature parts fail") {
    server::TrustSignature wrong_t4 = sig;
    wrong_t4.t4 = g.scalar_add(sig.t4, g.scalar_from_u64(1));
    CHECK(!server::verify_trust_attestation(sys, r_point, tv, wrong_t4));

    server::TrustSignature wrong_t5 = sig;
    wrong_t5.t5 = g.mul_gen(g.scalar_random(rng));
    CHECK(!server::verify_trust_attestation(sys, r_point, tv, wrong_t5));

    server::TrustSignature identity_t5 = sig;
    identity_t5.t5 = g.identity();
    CHECK(!server::verify_trust_attestation(sys, r_point, tv, identity_t5));
  }
  SUBCASE("all-zero trust cannot be signed or claimed") {
    trust::TrustVector zeros{0.0, 0.0, 0.0};
    CHECK_THROWS_AS(server::sign_trust_attestation(g, key, zeros, rng),
                    DomainError);
    CHECK(!server::verify_trust_attestation(sys, r_point, zeros, sig));
  }
  SUBCASE("entries outside [0,1] cannot be signed") {
    CHECK_THROWS_AS(server::sign_trust_attestation(g, key, {1.5}, rng),
                    DomainError);
    CHECK_THROWS_AS(server::sign_trust_attestation(g, key, {-0.1}, rng),
                    DomainError);
  }
}

TEST_CASE("quantization puts trust sums on a fixed grid") {
  crypto::Group g = crypto::Group::secp160r1();
  CHECK(server::quantize_trust_sum(g, {0.25, 0.25}) ==
        g.scalar_from_u64(500'000));
  CHECK(server::quantize_trust_sum(g, {}).is_zero());
  // values closer than half a grid step collapse to the same scalar
  CHECK(server::quantize_trust_sum(g, {0.5}) ==
        server::quantize_trust_sum(g, {0.5 + 2e-7}));
}
