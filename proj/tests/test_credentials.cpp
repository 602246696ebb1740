#include <doctest.h>

#include "tdp/credentials.hpp"
#include "tdp/errors.hpp"

using namespace tdp;
using namespace tdp::cred;

namespace {
KeyAuthority make_authority(std::uint64_t seed = 1000) {
  Rng rng(seed);
  return KeyAuthority(crypto::Group::secp160r1(), rng);
}
}  // namespace

TEST_CASE("issued partial keys verify") {
  KeyAuthority ka = make_authority();
  Rng rng(1);
  Credential c = register_device(ka, "alice", rng);

  CHECK(c.device_id == "alice");
  CHECK(verify_partial_key(ka.params(), "alice", c.r_point, c.p_dev, c.d));
  CHECK(ka.is_registered("alice"));

  // the combined public key equals (d + x_dev) * P
  const crypto::Group& g = ka.params().group;
  crypto::Point expect = g.mul_gen(g.scalar_add(c.d, c.x_dev));
  CHECK(combined_public_key(ka.params(), public_part(c)) == expect);
}

TEST_CASE("verification is bound to every input") {
  KeyAuthority ka = make_authority();
  Rng rng(2);
  Credential a = register_device(ka, "alice", rng);
  Credential b = register_device(ka, "bob", rng);

  // wrong id
  CHECK_FALSE(verify_partial_key(ka.params(), "alice2", a.r_point, a.p_dev,
                                 a.d));
  // mixed credentials
  CHECK_FALSE(verify_partial_key(ka.params(), "alice", b.r_point, a.p_dev,
                                 a.d));
  CHECK_FALSE(verify_partial_key(ka.params(), "alice", a.r_point, b.p_dev,
                                 a.d));
  CHECK_FALSE(verify_partial_key(ka.params(), "alice", a.r_point, a.p_dev,
                                 b.d));
  // perturbed d
  const crypto::Group& g = ka.params().group;
  crypto::Scalar bumped = g.scalar_add(a.d, g.scalar_from_u64(1));
  CHECK_FALSE(verify_partial_key(ka.params(), "alice", a.r_point, a.p_dev,
                                 bumped));
}

TEST_CASE("a foreign authority's keys do not verify here") {
  KeyAuthority ka1 = make_authority(10);
  KeyAuthority ka2 = make_authority(20);
  Rng rng(3);
  Credential c = register_device(ka1, "alice", rng);
  CHECK_FALSE(
      verify_partial_key(ka2.params(), "alice", c.r_point, c.p_dev, c.d));
}

TEST_CASE("duplicate registration is refused") {
  KeyAuthority ka = make_authority();
  Rng rng(4);
  register_device(ka, "alice", rng);
  CHECK_THROWS_AS(register_device(ka, "alice", rng), DuplicateRegistration);
}

TEST_CASE("bad device keys are refused at extraction") {
  KeyAuthority ka = make_authority();
  Rng rng(5);
  CHECK_THROWS_AS(ka.extract_partial_key("x", crypto::Point{}, rng),
                  InvalidPeerKey);
  crypto::Point off{mpz_class(3), mpz_class(4), false};
  CHECK_THROWS_AS(ka.extract_partial_key("x", off, rng), InvalidPeerKey);
}

TEST_CASE("registration secrets stay queryable by the authority only") {
  KeyAuthority ka = make_authority();
  Rng rng(6);
  Credential c = register_device(ka, "alice", rng);
  const crypto::Group& g = ka.params().group;
  CHECK(g.mul_gen(ka.registration_secret("alice")) == c.r_point);
  CHECK(ka.registered_r_point("alice") == c.r_point);
  CHECK_THROWS_AS(ka.registration_secret("nobody"), UnknownDevice);
  CHECK_THROWS_AS(ka.registered_r_point("nobody"), UnknownDevice);
}

TEST_CASE("public credential export round trip") {
  KeyAuthority ka = make_authority();
  Rng rng(7);
  Credential c = register_device(ka, "alice", rng);
  std::string text = export_public_credential(ka.params(), public_part(c));
  PublicCredential back = import_public_credential(ka.params(), text);
  CHECK(back.device_id == "alice");
  CHECK(back.p_dev == c.p_dev);
  CHECK(back.r_point == c.r_point);

  CHECK_THROWS_AS(import_public_credential(ka.params(), "not json"),
                  EncodingError);
  CHECK_THROWS_AS(import_public_credential(ka.params(), "{}"),
                  EncodingError);
}

TEST_CASE("credentials differ per device and per run") {
  KeyAuthority ka = make_authority();
  Rng rng(8);
  Credential a = register_device(ka, "alice", rng);
  Credential b = register_device(ka, "bob", rng);
  CHECK(a.d != b.d);
  CHECK(a.x_dev != b.x_dev);
  CHECK(a.p_dev != b.p_dev);
  CHECK(a.r_point != b.r_point);
}
