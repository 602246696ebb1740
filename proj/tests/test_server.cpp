#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "tdp/errors.hpp"
#include "tdp/pairing.hpp"
#include "tdp/server.hpp"

using namespace tdp;

namespace {

trust::TrustParams two_task_params() {
  trust::TrustParams p;
  p.task_types = {trust::TaskType{"relay", {1, 1}},
                  trust::TaskType{"sense", {1, 0}}};
  return p;
}

struct ServerBed {
  Rng rng;
  server::BsEngine bs;
  std::map<std::string, cred::Credential> devices;
  std::map<std::string, std::uint64_t> next_txn;

  ServerBed(std::uint64_t seed, trust::TrustParams params,
            const std::vector<std::string>& ids)
      : rng(seed), bs(crypto::Group::secp160r1(), std::move(params), rng) {
    for (const auto& id : ids) {
      devices.emplace(id, server::enroll_local_device(bs, id, rng));
    }
  }

  server::Receipt make_receipt(const std::string& owner,
                               const std::string& peer, bool owner_requests,
                               double q, double c, std::uint64_t task,
                               double t0, int rating) {
    server::Receipt fields;
    fields.owner_id = owner;
    fields.counterpart_id = peer;
    fields.owner_is_requester = owner_requests;
    fields.qos = q;
    fields.credibility = c;
    fields.task_index = task;
    fields.task_value = 1.0;
    fields.timestamp = t0;
    fields.txn_index = next_txn[owner]++;
    server::Endorsement e = server::endorse_receipt(
        bs.params(), devices.at(peer), cred::public_part(devices.at(owner)),
        fields, rating, rng);
    fields.encrypted_rating = e.encrypted_rating;
    fields.t1 = e.t1;
    fields.t2 = e.t2;
    return fields;
  }
};

}  // namespace

TEST_CASE("enrollment opens the ledger at the resting trust level") {
  ServerBed bed(11, two_task_params(), {"a", "b"});

  CHECK(bed.bs.trust_of("a") == trust::initial_trust(2));
  // the first attestation works before any transaction happened
  server::TrustSignature sig = bed.bs.sign_trust("a", bed.rng);
  CHECK(bed.bs.verify_trust_signature("a", bed.bs.trust_of("a"), sig));

  CHECK_THROWS_AS(bed.bs.trust_of("nobody"), UnknownDevice);
  CHECK_THROWS_AS(bed.bs.sign_trust("nobody", bed.rng), UnknownDevice);
  CHECK_THROWS_AS(server::enroll_local_device(bed.bs, "a", bed.rng),
                  DuplicateRegistration);
}

TEST_CASE("verified receipts adjust trust in the rated direction") {
  ServerBed bed(21, two_task_params(), {"a", "b"});
  bed.bs.set_clock(100.0);

  server::Receipt r = bed.make_receipt("a", "b", true, 0.9, 0.8, 0, 90.0, 1);
  CHECK(bed.bs.verify_receipt(r));

  double before = bed.bs.trust_of("a")[0];
  trust::TrustVector after = bed.bs.adjust_trust(r);
  CHECK(after[0] > before);
  CHECK(after[1] == std::exp(-1.0));  // other task untouched, bit-identical
  CHECK(bed.bs.trust_of("a") == after);
  CHECK(bed.bs.trust_of("b") == trust::initial_trust(2));  // owner only

  server::Receipt down = bed.make_receipt("a", "b", true, 0.9, 0.8, 0, 91.0, -1);
  trust::TrustVector after2 = bed.bs.adjust_trust(down);
  CHECK(after2[0] < after[0]);
}

TEST_CASE("one-sided tasks leave the ungated role's trust untouched") {
  ServerBed bed(22, two_task_params(), {"a", "b"});
  bed.bs.set_clock(10.0);
  // "sense" rewards requesters only; a worker-owned receipt changes nothing
  server::Receipt r = bed.make_receipt("b", "a", false, 0.9, 0.9, 1, 5.0, 1);
  CHECK(bed.bs.adjust_trust(r) == trust::initial_trust(2));
  // the same transaction shape owned by the requester does move
  server::Receipt r2 = bed.make_receipt("a", "b", true, 0.9, 0.9, 1, 5.0, 1);
  CHECK(bed.bs.adjust_trust(r2)[1] > std::exp(-1.0));
}

TEST_CASE("five hundred random transactions round-trip end to end") {
  const std::vector<std::string> ids{"a", "b", "c", "d", "e", "f"};
  ServerBed bed(77, two_task_params(), ids);
  const crypto::Group& g = bed.bs.params().group;

  std::vector<server::Receipt> all;
  for (int i = 0; i < 500; ++i) {
    double now = static_cast<double>(i);
    bed.bs.set_clock(now);
    const std::string& owner = ids[bed.rng.below(ids.size())];
    std::string peer = owner;
    while (peer == owner) peer = ids[bed.rng.below(ids.size())];

    server::Receipt r = bed.make_receipt(
        owner, peer, bed.rng.chance(0.5), bed.rng.real01(), bed.rng.real01(),
        bed.rng.below(2), now, bed.rng.chance(0.7) ? 1 : -1);
    REQUIRE(bed.bs.verify_receipt(r));
    trust::TrustVector tv = bed.bs.adjust_trust(r);
    for (double v : tv) {
      REQUIRE(v > 0.0);
      REQUIRE(v < 1.0);
    }
    all.push_back(std::move(r));
  }

  // every device's trust is attestable and the attestation is binding
  for (const auto& id : ids) {
    server::TrustSignature sig = bed.bs.sign_trust(id, bed.rng);
    CHECK(bed.bs.verify_trust_signature(id, bed.bs.trust_of(id), sig));
    trust::TrustVector inflated = bed.bs.trust_of(id);
    inflated[0] = std::min(1.0, inflated[0] + 0.25);
    CHECK(!bed.bs.verify_trust_signature(id, inflated, sig));
  }

  // receipts survive serialization byte-exactly and still verify
  auto path = std::filesystem::temp_directory_path() / "tdp_batch_rt.jsonl";
  server::write_receipt_batch(g, path.string(), all);
  std::vector<server::Receipt> loaded =
      server::read_receipt_batch(g, path.string());
  REQUIRE(loaded.size() == all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    CHECK(server::receipt_to_json(g, loaded[i]) ==
          server::receipt_to_json(g, all[i]));
  }
  CHECK(bed.bs.verify_receipt(loaded.front()));
  CHECK(bed.bs.verify_receipt(loaded.back()));
  std::filesystem::remove(path);
}

TEST_CASE("any bound field mutation defeats verification") {
  ServerBed bed(9, two_task_params(), {"a", "b", "c"});
  const crypto::Group& g = bed.bs.params().group;
  bed.bs.set_clock(50.0);

  server::Receipt good = bed.make_receipt("a", "b", true, 0.75, 0.6, 0, 40.0, 1);
  REQUIRE(bed.bs.verify_receipt(good));

  auto fails = [&](server::Receipt r) { return !bed.bs.verify_receipt(r); };

  {
    server::Receipt r = good;
    r.qos = 0.7500001;
    CHECK(fails(r));
  }
  {
    server::Receipt r = good;
    r.credibility = 0.6000001;
    CHECK(fails(r));
  }
  {
    server::Receipt r = good;
    r.encrypted_rating[3] ^= 0x01;
    CHECK(fails(r));
  }
  {
    server::Receipt r = good;
    r.encrypted_rating.push_back(0x00);
    CHECK(fails(r));
  }
  {
    server::Receipt r = good;
    r.task_index = 1;
    CHECK(fails(r));
  }
  {
    server::Receipt r = good;
    r.task_value = 0.75;
    CHECK(fails(r));
  }
  {
    server::Receipt r = good;
    r.timestamp = 41.0;  // still fresh, but no longer what was endorsed
    CHECK(fails(r));
  }
  {
    server::Receipt r = good;
    r.owner_is_requester = false;
    CHECK(fails(r));
  }
  {
    server::Receipt r = good;
    r.owner_id = "c";  // registered, but not who was endorsed
    CHECK(fails(r));
  }
  {
    server::Receipt r = good;
    r.counterpart_id = "c";
    CHECK(fails(r));
  }
  {
    server::Receipt r = good;
    r.txn_index += 1;
    CHECK(fails(r));
  }
  {
    server::Receipt r = good;
    r.t1 = g.mul_gen(g.scalar_from_u64(5));
    CHECK(fails(r));
  }
  {
    server::Receipt r = good;
    r.t2 = g.mul_gen(g.scalar_from_u64(5));
    CHECK(fails(r));
  }
  {
    server::Receipt r = good;
    r.t1 = g.identity();
    CHECK(fails(r));
    r.t1 = good.t1;
    r.t2 = g.identity();
    CHECK(fails(r));
  }
  {
    // halves spliced from a different valid receipt of the same pair
    server::Receipt other =
        bed.make_receipt("a", "b", true, 0.75, 0.6, 0, 41.0, 1);
    REQUIRE(bed.bs.verify_receipt(other));
    server::Receipt r = good;
    r.t1 = other.t1;
    r.t2 = other.t2;
    CHECK(fails(r));
    r = good;
    r.t2 = other.t2;
    CHECK(fails(r));
  }
  {
    // the reserved auxiliary field is carried but deliberately not bound
    server::Receipt r = good;
    r.t3 = Bytes{0x01, 0x02};
    CHECK(bed.bs.verify_receipt(r));
  }
  {
    // self-endorsement never verifies regardless of the algebra
    server::Receipt r = good;
    r.counterpart_id = r.owner_id;
    CHECK(fails(r));
  }
  CHECK(bed.bs.verify_receipt(good));  // the original is still intact
}

TEST_CASE("unknown devices are reported before any algebra") {
  ServerBed bed(31, two_task_params(), {"a", "b"});
  bed.bs.set_clock(5.0);
  server::Receipt r = bed.make_receipt("a", "b", true, 0.5, 0.5, 0, 1.0, 1);

  server::Receipt bad_owner = r;
  bad_owner.owner_id = "zz";
  CHECK_THROWS_AS(bed.bs.verify_receipt(bad_owner), UnknownDevice);
  server::Receipt bad_peer = r;
  bad_peer.counterpart_id = "zz";
  CHECK_THROWS_AS(bed.bs.verify_receipt(bad_peer), UnknownDevice);
}

TEST_CASE("replayed receipts are rejected exactly once") {
  ServerBed bed(32, two_task_params(), {"a", "b"});
  bed.bs.set_clock(10.0);
  server::Receipt r = bed.make_receipt("a", "b", true, 0.8, 0.5, 0, 9.0, 1);

  trust::TrustVector applied = bed.bs.adjust_trust(r);
  CHECK_THROWS_AS(bed.bs.adjust_trust(r), DuplicateReceipt);
  CHECK(bed.bs.trust_of("a") == applied);

  // a fresh endorsement under the same (owner, txn) counter is still a replay
  server::Receipt again = r;
  server::Endorsement e = server::endorse_receipt(
      bed.bs.params(), bed.devices.at("b"),
      cred::public_part(bed.devices.at("a")), again, -1, bed.rng);
  again.encrypted_rating = e.encrypted_rating;
  again.t1 = e.t1;
  again.t2 = e.t2;
  REQUIRE(bed.bs.verify_receipt(again));
  CHECK_THROWS_AS(bed.bs.adjust_trust(again), DuplicateReceipt);
  CHECK(bed.bs.trust_of("a") == applied);
}

TEST_CASE("freshness window bounds receipt age in both directions") {
  ServerBed bed(33, two_task_params(), {"a", "b"});
  bed.bs.set_freshness_window(3000.0);
  bed.bs.set_clock(10000.0);

  CHECK(bed.bs.verify_receipt(
      bed.make_receipt("a", "b", true, 0.5, 0.5, 0, 7000.0, 1)));
  CHECK(bed.bs.verify_receipt(
      bed.make_receipt("a", "b", true, 0.5, 0.5, 0, 10000.0, 1)));
  CHECK_THROWS_AS(bed.bs.verify_receipt(bed.make_receipt(
                      "a", "b", true, 0.5, 0.5, 0, 6999.0, 1)),
                  StaleReceipt);
  CHECK_THROWS_AS(bed.bs.verify_receipt(bed.make_receipt(
                      "a", "b", true, 0.5, 0.5, 0, 10001.0, 1)),
                  StaleReceipt);
  // and adjust_trust propagates the staleness rather than masking it
  CHECK_THROWS_AS(bed.bs.adjust_trust(bed.make_receipt("a", "b", true, 0.5,
                                                       0.5, 0, 500.0, 1)),
                  StaleReceipt);
}

TEST_CASE("out-of-range payload fields are invalid even when endorsed") {
  ServerBed bed(34, two_task_params(), {"a", "b"});
  bed.bs.set_clock(10.0);
  // endorse_receipt signs whatever it is given; range enforcement is the
  // server's job at adjust time
  server::Receipt r = bed.make_receipt("a", "b", true, 1.5, 0.5, 0, 9.0, 1);
  CHECK(bed.bs.verify_receipt(r));
  CHECK_THROWS_AS(bed.bs.adjust_trust(r), InvalidReceipt);

  server::Receipt tampered = bed.make_receipt("a", "b", true, 0.5, 0.5, 0, 9.0, 1);
  tampered.qos = 0.6;
  CHECK_THROWS_AS(bed.bs.adjust_trust(tampered), InvalidReceipt);

  server::Receipt bad_task = bed.make_receipt("a", "b", true, 0.5, 0.5, 7, 9.0, 1);
  CHECK_THROWS_AS(bed.bs.adjust_trust(bad_task), UnknownTaskType);
}

TEST_CASE("sealed ratings open only under the issuing key") {
  Rng rng(35);
  crypto::Group g = crypto::Group::secp160r1();
  crypto::Scalar d1 = g.scalar_random(rng);
  crypto::Scalar d2 = g.scalar_random(rng);

  Bytes up = server::seal_rating(g, d1, 1, rng);
  Bytes down = server::seal_rating(g, d1, -1, rng);
  CHECK(server::open_rating(g, d1, up) == 1);
  CHECK(server::open_rating(g, d1, down) == -1);
  CHECK(!server::open_rating(g, d2, up));
  Bytes tampered = up;
  tampered[tampered.size() / 2] ^= 0x40;
  CHECK(!server::open_rating(g, d1, tampered));
  CHECK(!server::open_rating(g, d1, Bytes{}));
  CHECK_THROWS_AS(server::seal_rating(g, d1, 0, rng), DomainError);
  CHECK_THROWS_AS(server::seal_rating(g, d1, 2, rng), DomainError);
}

TEST_CASE("receipts only come out of confirmed sessions") {
  Rng rng(36);
  trust::TrustParams params = two_task_params();
  ServerBed bed(36, params, {"alice", "bob"});
  const cred::SystemParams& sys = bed.bs.params();

  pairing::PairingSession sa(sys, bed.devices.at("alice"),
                             pairing::Role::Initiator, rng);
  pairing::PairingSession sb(sys, bed.devices.at("bob"),
                             pairing::Role::Responder, rng);

  server::Receipt fields;
  fields.owner_id = "alice";
  fields.counterpart_id = "bob";
  fields.owner_is_requester = true;
  fields.qos = 0.9;
  fields.credibility = 0.7;
  fields.timestamp = 1.0;
  server::Endorsement e = server::endorse_receipt(
      sys, bed.devices.at("bob"), cred::public_part(bed.devices.at("alice")),
      fields, 1, rng);

  CHECK_THROWS_AS(server::generate_receipt(sa, fields, e),
                  SessionNotConfirmed);

  sa.receive_key_share(sb.key_share());
  sb.receive_key_share(sa.key_share());
  auto challenge = sa.make_challenge(rng);
  auto response = sb.answer_challenge(challenge, rng);
  REQUIRE(response);
  auto confirm = sa.check_response(*response, rng);
  REQUIRE(confirm);
  REQUIRE(sb.accept_confirm(*confirm));

  server::Receipt done = server::generate_receipt(sa, fields, e);
  bed.bs.set_clock(2.0);
  CHECK(bed.bs.verify_receipt(done));
  CHECK(bed.bs.adjust_trust(done)[0] > std::exp(-1.0));

  // the wrong session cannot issue this receipt: its owner is the peer
  CHECK_THROWS_AS(server::generate_receipt(sb, fields, e), DomainError);
  // nor can an endorsement be minted for mismatched identities
  server::Receipt crossed = fields;
  crossed.counterpart_id = "alice";
  CHECK_THROWS_AS(
      server::endorse_receipt(sys, bed.devices.at("bob"),
                              cred::public_part(bed.devices.at("alice")),
                              crossed, 1, rng),
      DomainError);
}

TEST_CASE("trust cycles batch receipts and re-estimate the average") {
  const std::vector<std::string> ids{"a", "b", "c"};
  ServerBed bed(40, two_task_params(), ids);
  bed.bs.set_clock(1000.0);
  CHECK(bed.bs.sigma_bar() == 30.0);  // configured prior before any cycle

  std::vector<server::Receipt> batch;
  auto add_owned = [&](const std::string& owner, const std::string& peer,
                       int count) {
    for (int i = 0; i < count; ++i) {
      batch.push_back(bed.make_receipt(owner, peer, i % 2 == 0, 0.8, 0.6,
                                       i % 2, 900.0 + i, 1));
    }
  };
  add_owned("a", "b", 10);
  add_owned("b", "c", 20);
  add_owned("c", "a", 30);

  // poison: a replay, an unknown owner, and a tampered field
  batch.push_back(batch.front());
  server::Receipt ghost = batch[1];
  ghost.owner_id = "zz";
  batch.push_back(ghost);
  server::Receipt bent = batch[2];
  bent.qos = 0.81;
  batch.push_back(bent);

  server::CycleReport rep = bed.bs.run_trust_cycle(batch, bed.rng);
  CHECK(rep.cycle_index == 0);
  CHECK(rep.accepted == 60);
  REQUIRE(rep.rejected.size() == 3);
  std::map<std::string, int> reasons;
  for (const auto& rej : rep.rejected) ++reasons[rej.reason];
  CHECK(reasons["duplicate"] == 1);
  CHECK(reasons["unknown-device"] == 1);
  CHECK(reasons["invalid"] == 1);

  // {10, 20, 30} accepted receipts over three devices
  CHECK(rep.sigma_bar_next == 20.0);
  CHECK(bed.bs.sigma_bar() == 20.0);

  REQUIRE(rep.devices.size() == 3);
  CHECK(rep.devices[0].device_id == "a");
  CHECK(rep.devices[2].device_id == "c");
  for (const auto& snap : rep.devices) {
    CHECK(snap.trustvalue == bed.bs.trust_of(snap.device_id));
    REQUIRE(snap.attestation.has_value());
    CHECK(bed.bs.verify_trust_signature(snap.device_id, snap.trustvalue,
                                        *snap.attestation));
  }

  // an idle cycle keeps the estimate instead of zeroing it
  server::CycleReport idle = bed.bs.run_trust_cycle({}, bed.rng);
  CHECK(idle.cycle_index == 1);
  CHECK(idle.accepted == 0);
  CHECK(idle.sigma_bar_next == 20.0);

  // report serialization is well-formed JSON with the same numbers
  nlohmann::json j =
      nlohmann::json::parse(server::cycle_report_to_json(bed.bs.params(), rep));
  CHECK(j["accepted"] == 60);
  CHECK(j["sigma_bar_next"] == 20.0);
  CHECK(j["rejected"].size() == 3);
  CHECK(j["devices"].size() == 3);
  CHECK(j["devices"][0]["attestation"].contains("t4"));
}

TEST_CASE("receipt batches surface parse failures by line") {
  ServerBed bed(50, two_task_params(), {"a", "b"});
  const crypto::Group& g = bed.bs.params().group;
  bed.bs.set_clock(10.0);
  server::Receipt r = bed.make_receipt("a", "b", true, 0.5, 0.5, 0, 9.0, 1);
  std::string good_line = server::receipt_to_json(g, r);

  auto dir = std::filesystem::temp_directory_path();

  auto write_lines = [&](const std::string& name,
                         const std::vector<std::string>& lines) {
    auto p = dir / name;
    std::ofstream out(p);
    for (const auto& l : lines) out << l << '\n';
    return p.string();
  };

  SUBCASE("bad json names the line") {
    std::string p = write_lines("tdp_bad1.jsonl", {good_line, "{nope"});
    try {
      server::read_receipt_batch(g, p);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
    std::filesystem::remove(p);
  }
  SUBCASE("missing fields are named") {
    std::string p = write_lines("tdp_bad2.jsonl", {R"({"owner":"a"})"});
    CHECK_THROWS_WITH_AS(server::read_receipt_batch(g, p),
                         doctest::Contains("missing field"), ParseError);
    std::filesystem::remove(p);
  }
  SUBCASE("bad point encodings are parse errors") {
    nlohmann::json j = nlohmann::json::parse(good_line);
    j["t1"] = "00ff";
    std::string p = write_lines("tdp_bad3.jsonl", {j.dump()});
    CHECK_THROWS_AS(server::read_receipt_batch(g, p), ParseError);
    std::filesystem::remove(p);
  }
  SUBCASE("blank lines are fine; content survives") {
    std::string p =
        write_lines("tdp_ok.jsonl", {"", good_line, "   ", good_line});
    std::vector<server::Receipt> loaded = server::read_receipt_batch(g, p);
    REQUIRE(loaded.size() == 2);
    CHECK(server::receipt_to_json(g, loaded[0]) == good_line);
    CHECK(bed.bs.verify_receipt(loaded[1]));
    std::filesystem::remove(p);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(server::read_receipt_batch(g, (dir / "nope9").string()),
                    ParseError);
  }
}
