#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "tdp/aead.hpp"
#include "tdp/credentials.hpp"
#include "tdp/group.hpp"
#include "tdp/pairing.hpp"
#include "tdp/rng.hpp"

namespace tdp::server {

// Record of one finished transaction, uploaded by the device whose trust it
// adjusts. Each side of a transaction produces its own receipt; the
// counterpart endorses it, so a device can never rate itself.
//
//   er  : counterpart's rating of the owner, sealed under a key only the
//         counterpart and the server can derive (h1 of the counterpart's
//         partial key). The owner carries it but cannot read or forge it.
//   T1  : l_t * h' * D_a, where D_a = d_a * P is reconstructed from the
//         owner's public credential and h' is the binding hash below.
//   T2  : l_t * d_b * P, the counterpart's half. l_t is fresh per receipt.
//
// The server, knowing both partial keys, accepts iff
//   d_b * T1 == (h' * d_a) * T2
// which holds exactly when both halves were formed over the same h' by a
// counterpart holding d_b. Tampering with any bound field changes h' on the
// verifier side only, breaking the equation.
struct Receipt {
  std::string owner_id;        // device whose trust this adjusts
  std::string counterpart_id;  // device that endorsed it
  bool owner_is_requester = false;
  double qos = 0.0;            // q for the transaction, in [0,1]
  double credibility = 0.0;    // c the owner computed for the counterpart
  std::uint64_t task_index = 0;   // position of the one-hot task indicator
  double task_value = 1.0;        // its magnitude (normally 1)
  double timestamp = 0.0;         // t0, owner's upload clock
  std::uint64_t txn_index = 0;    // owner-local transaction counter
  Bytes encrypted_rating;         // er
  crypto::Point t1;
  crypto::Point t2;
  Bytes t3;  // reserved, carried opaquely, not bound by h'
};

// What the counterpart hands back over the session-encrypted channel: the
// sealed rating plus its halves of the verification pair.
struct Endorsement {
  Bytes encrypted_rating;
  crypto::Point t1;
  crypto::Point t2;
};

// Symmetric key that seals ratings: h1 over the device's encoded partial
// key. Derivable only by the device itself and the server that issued d.
Bytes rating_key(const crypto::Group& g, const crypto::Scalar& d);

// rating must be +1 or -1; anything else throws DomainError.
Bytes seal_rating(const crypto::Group& g, const crypto::Scalar& d, int rating,
                  Rng& rng);
// nullopt when the blob does not open under this key or holds no valid
// rating byte.
std::optional<int> open_rating(const crypto::Group& g,
                               const crypto::Scalar& d, const Bytes& blob);

// Hash binding every field the server's check depends on. Both the endorser
// and the server must derive the identical scalar, so all numeric fields go
// in with fixed-width canonical encodings.
crypto::Scalar receipt_binding_hash(const crypto::Group& g,
                                    const Receipt& fields);

// Counterpart side: seal the rating and build the verification pair for the
// owner's receipt-in-progress. `fields` carries everything except er/T1/T2,
// agreed over the encrypted channel; its encrypted_rating/t1/t2 are ignored.
Endorsement endorse_receipt(const cred::SystemParams& sys,
                            const cred::Credential& endorser,
                            const cred::PublicCredential& owner,
                            const Receipt& fields, int rating, Rng& rng);

// Owner side: assemble the uploadable receipt from an endorsement received
// through a confirmed pairing session. Throws SessionNotConfirmed unless the
// session reached Confirmed, and DomainError when the endorsement targets a
// different peer than the session's.
Receipt generate_receipt(const pairing::PairingSession& session,
                         const Receipt& fields, const Endorsement& e);

}  // namespace tdp::server
