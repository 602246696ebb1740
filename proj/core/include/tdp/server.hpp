#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tdp/credentials.hpp"
#include "tdp/receipt.hpp"
#include "tdp/rng.hpp"
#include "tdp/trust.hpp"
#include "tdp/trust_signature.hpp"

namespace tdp::server {

struct RejectedReceipt {
  std::string owner_id;
  std::uint64_t txn_index = 0;
  std::string reason;  // duplicate | stale | unknown-device | unknown-task | invalid
};

struct DeviceSnapshot {
  std::string device_id;
  trust::TrustVector trustvalue;
  // Absent only when the trustvalue quantizes to zero, which has no valid
  // signature; the device keeps operating but cannot prove its trust.
  std::optional<TrustSignature> attestation;
};

struct CycleReport {
  std::uint64_t cycle_index = 0;
  std::size_t accepted = 0;
  std::vector<RejectedReceipt> rejected;
  double sigma_bar_next = 0.0;
  std::vector<DeviceSnapshot> devices;  // sorted by device id
};

std::string cycle_report_to_json(const cred::SystemParams& sys,
                                 const CycleReport& report);

// One receipt per line; doubles survive the round trip bit-exactly, so the
// binding hash recomputes identically after a save/load.
std::string receipt_to_json(const crypto::Group& g, const Receipt& r);
Receipt receipt_from_json(const crypto::Group& g, const std::string& text);
void write_receipt_batch(const crypto::Group& g, const std::string& path,
                         const std::vector<Receipt>& batch);
// Throws ParseError naming the offending line.
std::vector<Receipt> read_receipt_batch(const crypto::Group& g,
                                        const std::string& path);

// The backend: key authority plus the trust ledger it maintains from
// uploaded receipts. Devices never talk to each other through it and it
// never learns session keys; everything it consumes arrives as receipts.
class BsEngine {
 public:
  BsEngine(crypto::Group group, trust::TrustParams params, Rng& rng);

  const cred::SystemParams& params() const { return authority_.params(); }
  const trust::TrustParams& trust_params() const { return params_; }
  const cred::KeyAuthority& authority() const { return authority_; }

  // Registers the device (it supplies only P_dev, keeping x_dev private) and
  // opens its trust record at the initial value. Same failure modes as
  // KeyAuthority::extract_partial_key.
  cred::KeyAuthority::Issue enroll_device(const std::string& device_id,
                                          const crypto::Point& p_dev,
                                          Rng& rng);

  double clock() const { return clock_; }
  void set_clock(double now) { clock_ = now; }
  // Receipts older than this (relative to the engine clock) are stale.
  // Defaults to infinity; deployments set it to one trust-cycle length.
  double freshness_window() const { return window_; }
  void set_freshness_window(double seconds) { window_ = seconds; }

  // Average per-device transaction count, re-estimated every cycle.
  double sigma_bar() const { return sigma_bar_; }

  const trust::TrustVector& trust_of(const std::string& device_id) const;

  // Algebraic and freshness check only; no state change. Throws
  // UnknownDevice for unregistered ids and StaleReceipt when the timestamp
  // falls outside the freshness window, returns false on any other mismatch.
  bool verify_receipt(const Receipt& r) const;

  // Applies one verified receipt to the owner's trustvalue and returns the
  // new value. Throws InvalidReceipt when verification or the sealed rating
  // fails, DuplicateReceipt for a replayed (owner, txn_index), and
  // UnknownTaskType for an out-of-range task index.
  trust::TrustVector adjust_trust(const Receipt& r);

  TrustSignature sign_trust(const std::string& device_id, Rng& rng) const;
  bool verify_trust_signature(const std::string& device_id,
                              const trust::TrustVector& claimed,
                              const TrustSignature& sig) const;

  // End-of-cycle batch processing: applies every receipt (rejections are
  // collected, not thrown), re-estimates sigma_bar as accepted receipts per
  // registered device, and emits fresh attestations for everyone.
  CycleReport run_trust_cycle(const std::vector<Receipt>& batch, Rng& rng);

 private:
  cred::KeyAuthority authority_;
  trust::TrustParams params_;
  double clock_ = 0.0;
  double window_ = std::numeric_limits<double>::infinity();
  double sigma_bar_;
  std::uint64_t cycle_index_ = 0;
  std::map<std::string, trust::TrustVector> trust_;
  std::set<std::pair<std::string, std::uint64_t>> seen_;
};

// Runs both halves of enrollment in one call for in-process devices.
cred::Credential enroll_local_device(BsEngine& bs,
                                     const std::string& device_id, Rng& rng);

}  // namespace tdp::server
