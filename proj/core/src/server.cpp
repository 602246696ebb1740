#include "tdp/server.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tdp/errors.hpp"

namespace tdp::server {

using nlohmann::json;

std::string receipt_to_json(const crypto::Group& g, const Receipt& r) {
  json j;
  j["owner"] = r.owner_id;
  j["counterpart"] = r.counterpart_id;
  j["owner_is_requester"] = r.owner_is_requester;
  j["qos"] = r.qos;
  j["credibility"] = r.credibility;
  j["task_index"] = r.task_index;
  j["task_value"] = r.task_value;
  j["timestamp"] = r.timestamp;
  j["txn_index"] = r.txn_index;
  j["er"] = hex_encode(r.encrypted_rating);
  j["t1"] = hex_encode(g.point_encode(r.t1));
  j["t2"] = hex_encode(g.point_encode(r.t2));
  if (!r.t3.empty()) j["t3"] = hex_encode(r.t3);
  return j.dump();
}

Receipt receipt_from_json(const crypto::Group& g, const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("receipt: ") + e.what());
  }
  static const char* required[] = {"owner",      "counterpart", "qos",
                                   "credibility", "task_index", "task_value",
                                   "timestamp",  "txn_index",  "er",
                                   "t1",         "t2"};
  if (!j.is_object()) throw ParseError("receipt: not an object");
  for (const char* key : required) {
    if (!j.contains(key)) {
      throw ParseError(std::string("receipt: missing field ") + key);
    }
  }
  try {
    Receipt r;
    r.owner_id = j["owner"].get<std::string>();
    r.counterpart_id = j["counterpart"].get<std::string>();
    r.owner_is_requester = j.value("owner_is_requester", false);
    r.qos = j["qos"].get<double>();
    r.credibility = j["credibility"].get<double>();
    r.task_index = j["task_index"].get<std::uint64_t>();
    r.task_value = j["task_value"].get<double>();
    r.timestamp = j["timestamp"].get<double>();
    r.txn_index = j["txn_index"].get<std::uint64_t>();
    r.encrypted_rating = hex_decode(j["er"].get<std::string>());
    r.t1 = g.point_decode(hex_decode(j["t1"].get<std::string>()));
    r.t2 = g.point_decode(hex_decode(j["t2"].get<std::string>()));
    if (j.contains("t3")) r.t3 = hex_decode(j["t3"].get<std::string>());
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("receipt: ") + e.what());
  } catch (const EncodingError& e) {
    throw ParseError(std::string("receipt: ") + e.what());
  }
}

void write_receipt_batch(const crypto::Group& g, const std::string& path,
                         const std::vector<Receipt>& batch) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path);
  for (const Receipt& r : batch) out << receipt_to_json(g, r) << '\n';
}

std::vector<Receipt> read_receipt_batch(const crypto::Group& g,
                                        const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open: " + path);
  std::vector<Receipt> batch;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      batch.push_back(receipt_from_json(g, line));
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return batch;
}

std::string cycle_report_to_json(const cred::SystemParams& sys,
                                 const CycleReport& report) {
  const crypto::Group& g = sys.group;
  json j;
  j["cycle"] = report.cycle_index;
  j["accepted"] = report.accepted;
  j["sigma_bar_next"] = report.sigma_bar_next;
  j["rejected"] = json::array();
  for (const RejectedReceipt& r : report.rejected) {
    j["rejected"].push_back({{"owner", r.owner_id},
                             {"txn_index", r.txn_index},
                             {"reason", r.reason}});
  }
  j["devices"] = json::array();
  for (const DeviceSnapshot& d : report.devices) {
    json entry;
    entry["id"] = d.device_id;
    entry["trustvalue"] = d.trustvalue;
    if (d.attestation) {
      entry["attestation"] = {
          {"t4", hex_encode(g.scalar_encode(d.attestation->t4))},
          {"t5", hex_encode(g.point_encode(d.attestation->t5))}};
    } else {
      entry["attestation"] = nullptr;
    }
    j["devices"].push_back(std::move(entry));
  }
  return j.dump(2);
}

BsEngine::BsEngine(crypto::Group group, trust::TrustParams params, Rng& rng)
    : authority_(std::move(group), rng), params_(std::move(params)) {
  params_.validate();
  sigma_bar_ = params_.sigma_bar;
}

cred::KeyAuthority::Issue BsEngine::enroll_device(const std::string& device_id,
                                                  const crypto::Point& p_dev,
                                                  Rng& rng) {
  cred::KeyAuthority::Issue issue =
      authority_.extract_partial_key(device_id, p_dev, rng);
  trust_.emplace(device_id, trust::initial_trust(params_.dim()));
  return issue;
}

const trust::TrustVector& BsEngine::trust_of(
    const std::string& device_id) const {
  auto it = trust_.find(device_id);
  if (it == trust_.end()) throw UnknownDevice("trust_of: " + device_id);
  return it->second;
}

bool BsEngine::verify_receipt(const Receipt& r) const {
  const crypto::Group& g = authority_.params().group;
  if (!authority_.is_registered(r.owner_id)) {
    throw UnknownDevice("verify_receipt: owner " + r.owner_id);
  }
  if (!authority_.is_registered(r.counterpart_id)) {
    throw UnknownDevice("verify_receipt: counterpart " + r.counterpart_id);
  }
  if (!(r.timestamp <= clock_) || clock_ - r.timestamp > window_) {
    throw StaleReceipt("verify_receipt: timestamp " +
                       std::to_string(r.timestamp) + " outside window at " +
                       std::to_string(clock_));
  }
  if (r.owner_id == r.counterpart_id) return false;
  // Identity points would satisfy the pairing equation trivially.
  if (!g.on_curve(r.t1) || g.is_identity(r.t1)) return false;
  if (!g.on_curve(r.t2) || g.is_identity(r.t2)) return false;

  crypto::Scalar h = receipt_binding_hash(g, r);
  const crypto::Scalar& da = authority_.issued_partial_key(r.owner_id);
  const crypto::Scalar& db = authority_.issued_partial_key(r.counterpart_id);
  // d_b * T1 == (h * d_a) * T2, the inversion-free form of
  // (d_a * h / d_b) * T2 == T1.
  return g.mul(db, r.t1) == g.mul(g.scalar_mul(h, da), r.t2);
}

trust::TrustVector BsEngine::adjust_trust(const Receipt& r) {
  if (!verify_receipt(r)) {
    throw InvalidReceipt("adjust_trust: verification failed for " +
                         r.owner_id + "#" + std::to_string(r.txn_index));
  }
  auto key = std::make_pair(r.owner_id, r.txn_index);
  if (seen_.contains(key)) {
    throw DuplicateReceipt("adjust_trust: replay of " + r.owner_id + "#" +
                           std::to_string(r.txn_index));
  }
  if (r.task_index >= params_.dim()) {
    throw UnknownTaskType("adjust_trust: task index " +
                          std::to_string(r.task_index));
  }
  if (!(r.qos >= 0.0 && r.qos <= 1.0) ||
      !(r.credibility >= 0.0 && r.credibility <= 1.0) ||
      !(r.task_value > 0.0 && r.task_value <= 1.0)) {
    throw InvalidReceipt("adjust_trust: field out of range");
  }

  const crypto::Group& g = authority_.params().group;
  const crypto::Scalar& db = authority_.issued_partial_key(r.counterpart_id);
  std::optional<int> rating = open_rating(g, db, r.encrypted_rating);
  if (!rating) {
    throw InvalidReceipt("adjust_trust: sealed rating does not open");
  }

  trust::TransactionTypeVector tx{r.task_index, r.task_value};
  trust::Role role =
      r.owner_is_requester ? trust::Role::Requester : trust::Role::Worker;
  std::vector<double> delta = trust::behavior_estimate(
      r.qos, r.credibility, *rating, tx, params_, role);

  auto it = trust_.find(r.owner_id);
  it->second = trust::update_trust(it->second, delta, params_.c_g);
  seen_.insert(std::move(key));
  return it->second;
}

TrustSignature BsEngine::sign_trust(const std::string& device_id,
                                    Rng& rng) const {
  auto it = trust_.find(device_id);
  if (it == trust_.end()) throw UnknownDevice("sign_trust: " + device_id);
  return sign_trust_attestation(authority_.params().group,
                                authority_.attestation_key(device_id),
                                it->second, rng);
}

bool BsEngine::verify_trust_signature(const std::string& device_id,
                                      const trust::TrustVector& claimed,
                                      const TrustSignature& sig) const {
  return verify_trust_attestation(authority_.params(),
                                  authority_.registered_r_point(device_id),
                                  claimed, sig);
}

CycleReport BsEngine::run_trust_cycle(const std::vector<Receipt>& batch,
                                      Rng& rng) {
  CycleReport report;
  report.cycle_index = cycle_index_;

  // Deterministic application order regardless of upload order.
  std::vector<const Receipt*> ordered;
  ordered.reserve(batch.size());
  for (const Receipt& r : batch) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const Receipt* a, const Receipt* b) {
                     if (a->owner_id != b->owner_id)
                       return a->owner_id < b->owner_id;
                     return a->txn_index < b->txn_index;
                   });

  for (const Receipt* r : ordered) {
    std::string reason;
    try {
      adjust_trust(*r);
      ++report.accepted;
      continue;
    } catch (const DuplicateReceipt&) {
      reason = "duplicate";
    } catch (const StaleReceipt&) {
      reason = "stale";
    } catch (const UnknownDevice&) {
      reason = "unknown-device";
    } catch (const UnknownTaskType&) {
      reason = "unknown-task";
    } catch (const InvalidReceipt&) {
      reason = "invalid";
    }
    report.rejected.push_back({r->owner_id, r->txn_index, reason});
  }

  // Per-device transaction average for the next cycle's damping. A cycle
  // with no accepted receipts keeps the previous estimate rather than
  // collapsing the damping scale to zero.
  if (report.accepted > 0 && !trust_.empty()) {
    sigma_bar_ = static_cast<double>(report.accepted) /
                 static_cast<double>(trust_.size());
  }
  report.sigma_bar_next = sigma_bar_;

  for (const auto& [id, tv] : trust_) {
    DeviceSnapshot snap;
    snap.device_id = id;
    snap.trustvalue = tv;
    try {
      snap.attestation = sign_trust(id, rng);
    } catch (const DomainError&) {
      snap.attestation = std::nullopt;
    }
    report.devices.push_back(std::move(snap));
  }

  ++cycle_index_;
  return report;
}

cred::Credential enroll_local_device(BsEngine& bs,
                                     const std::string& device_id, Rng& rng) {
  const crypto::Group& g = bs.params().group;
  auto [x_dev, p_dev] = cred::device_begin_registration(g, rng);
  cred::KeyAuthority::Issue issue = bs.enroll_device(device_id, p_dev, rng);
  return cred::Credential{device_id, std::move(x_dev), std::move(p_dev),
                          std::move(issue.d), std::move(issue.r_point)};
}

}  // namespace tdp::server
