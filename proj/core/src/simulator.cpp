#include "tdp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <utility>

#include "tdp/errors.hpp"
#include "tdp/pairing.hpp"
#include "tdp/receipt.hpp"
#include "tdp/server.hpp"

namespace tdp::sim {

namespace {

// Per-device state living outside the trust engine: what the device itself
// carries between transactions.
struct Device {
  cred::Credential cred;
  bool attacker = false;
  trust::ContactHistory history;
  trust::BehaviorEwma baseline;
  trust::TrustVector advert_tv;
  server::TrustSignature advert_sig;
  std::uint64_t next_txn = 0;
  std::uint64_t requests_posted = 0;
};

std::pair<std::string, std::string> canon(const std::string& a,
                                          const std::string& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

double vector_mean(const trust::TrustVector& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

server::TrustSignature forged_signature(const crypto::Group& g, Rng& rng) {
  return server::TrustSignature{g.scalar_random(rng),
                                g.mul_gen(g.scalar_random(rng))};
}

MetricsRecord run_labeled(const SimConfig& cfg,
                          const std::vector<TraceEvent>& trace,
                          const std::set<std::string>& attackers) {
  if (trace.empty()) throw EmptyTrace("simulation requires a nonempty trace");

  Rng rng(cfg.seed);
  crypto::Group g = crypto::Group::secp160r1();
  server::BsEngine bs(g, cfg.trust, rng);
  bs.set_freshness_window(cfg.cycle_length);

  MetricsRecord m;
  m.device_ids = trace_devices(trace);
  m.attackers = attackers;

  std::map<std::string, Device> devs;
  for (const std::string& id : m.device_ids) {
    Device d;
    d.cred = server::enroll_local_device(bs, id, rng);
    d.attacker = attackers.contains(id);
    d.advert_tv = bs.trust_of(id);
    d.advert_sig = bs.sign_trust(id, rng);
    devs.emplace(id, std::move(d));
  }

  const double p95 = duration_p95(trace);
  double sigma_bar_now = bs.sigma_bar();

  // live contact windows, canonical pair -> latest end time
  std::map<std::pair<std::string, std::string>, double> active;
  std::vector<server::Receipt> pending;
  double next_boundary = cfg.cycle_length;
  double fp_cum = 0.0;

  auto flush_cycle = [&](double boundary) {
    bs.set_clock(boundary);
    server::CycleReport report = bs.run_trust_cycle(pending, rng);
    pending.clear();
    m.receipts_accepted += report.accepted;
    m.receipts_rejected += report.rejected.size();
    for (const server::DeviceSnapshot& snap : report.devices) {
      Device& d = devs.at(snap.device_id);
      d.advert_tv = snap.trustvalue;
      d.advert_sig = snap.attestation ? *snap.attestation
                                      : server::TrustSignature{};
      d.history.reset();
    }
    sigma_bar_now = bs.sigma_bar();
    std::map<std::string, double> row;
    for (const std::string& id : m.device_ids)
      row[id] = vector_mean(bs.trust_of(id));
    m.trust_by_cycle.push_back(std::move(row));
    m.cycles++;
  };

  for (const TraceEvent& e : trace) {
    if (e.t_start >= cfg.duration) break;
    while (e.t_start >= next_boundary) {
      flush_cycle(next_boundary);
      next_boundary += cfg.cycle_length;
    }

    std::erase_if(active,
                  [&](const auto& kv) { return kv.second <= e.t_start; });
    double& live_end = active[canon(e.a, e.b)];
    live_end = std::max(live_end, e.t_end);

    const double window = std::min(e.t_end, cfg.duration) - e.t_start;
    if (window < cfg.min_contact) {
      m.skipped_windows++;
      continue;
    }

    // the device that has requested less takes the requester turn
    const Device& da = devs.at(e.a);
    const Device& db = devs.at(e.b);
    const std::string& req_id =
        (da.requests_posted < db.requests_posted ||
         (da.requests_posted == db.requests_posted && e.a < e.b))
            ? e.a
            : e.b;
    Device& requester = devs.at(req_id);
    requester.requests_posted++;

    const std::size_t task = rng.below(cfg.trust.dim());

    // everyone currently in contact with the requester advertises
    std::vector<pairing::PeerCandidate> candidates;
    std::set<std::string> forging_now;
    for (const auto& [pr, t_end] : active) {
      std::string other;
      if (pr.first == req_id)
        other = pr.second;
      else if (pr.second == req_id)
        other = pr.first;
      else
        continue;
      Device& cand = devs.at(other);
      pairing::PeerCandidate pc;
      pc.pk = cred::public_part(cand.cred);
      // zero intensity must not even touch the rng, so the run stays
      // bit-identical to an honest one
      const bool tries_forging = cand.attacker &&
                                 cfg.attacker_model == AttackerModel::TO1 &&
                                 cfg.attack_intensity > 0.0;
      if (tries_forging) m.attacker_override_draws++;
      if (tries_forging && rng.chance(cfg.attack_intensity)) {
        m.attacker_overrides++;
        m.forged_advertisements++;
        pc.trustvalue = trust::TrustVector(cfg.trust.dim(), 0.99);
        pc.attestation = forged_signature(g, rng);
        forging_now.insert(other);
      } else {
        pc.trustvalue = cand.advert_tv;
        pc.attestation = cand.advert_sig;
      }
      candidates.push_back(std::move(pc));
    }

    std::string peer_id;
    try {
      peer_id = pairing::select_peer(bs.params(), candidates, task);
    } catch (const NoCandidates&) {
      m.no_candidate_windows++;
      continue;
    }
    if (forging_now.contains(peer_id)) m.forged_selected++;
    Device& peer = devs.at(peer_id);

    pairing::PairingSession sr(bs.params(), requester.cred,
                               pairing::Role::Initiator, rng);
    pairing::PairingSession sp(bs.params(), peer.cred,
                               pairing::Role::Responder, rng);
    sp.receive_key_share(sr.key_share());
    sr.receive_key_share(sp.key_share());
    bool confirmed = false;
    if (sr.state() == pairing::SessionState::KeyDerived &&
        sp.state() == pairing::SessionState::KeyDerived) {
      auto challenge = sr.make_challenge(rng);
      auto response = sp.answer_challenge(challenge, rng);
      auto confirm =
          response ? sr.check_response(*response, rng) : std::nullopt;
      confirmed = confirm && sp.accept_confirm(*confirm) &&
                  sr.state() == pairing::SessionState::Confirmed &&
                  sp.state() == pairing::SessionState::Confirmed;
    }
    if (!confirmed) {
      m.failed_pairings++;
      continue;
    }

    // QoS from the remaining shared window, normalized by the trace scale
    const double overlap =
        std::min(active.at(canon(req_id, peer_id)), cfg.duration) - e.t_start;
    double q = 0.0;
    switch (cfg.qos_model) {
      case QosModel::ContactDuration:
        q = std::clamp(overlap / p95, 0.0, 1.0);
        break;
      case QosModel::DataVolume:
        q = std::clamp(overlap * cfg.data_rate / (p95 * cfg.data_rate), 0.0,
                       1.0);
        break;
      case QosModel::Constant:
        q = cfg.qos_constant;
        break;
    }

    trust::TrustParams live = cfg.trust;
    live.sigma_bar = sigma_bar_now;
    const std::uint64_t sigma_rp = requester.history.transactions_with(peer_id);
    const double c =
        trust::credibility(requester.history, peer.history, sigma_rp, live);
    const double beta_eff =
        trust::effective_beta(requester.history, peer.history, cfg.trust.beta);

    int rating_by_req = trust::rate(q, c, requester.baseline, beta_eff);
    int rating_by_peer = trust::rate(q, c, peer.baseline, beta_eff);
    auto overridden = [&](const Device& rater, const std::string& ratee,
                          int honest) {
      if (!rater.attacker) return honest;
      if (cfg.attacker_model != AttackerModel::TO2 &&
          cfg.attacker_model != AttackerModel::TO3)
        return honest;
      if (cfg.attack_intensity == 0.0) return honest;
      m.attacker_override_draws++;
      if (!rng.chance(cfg.attack_intensity)) return honest;
      m.attacker_overrides++;
      if (cfg.attacker_model == AttackerModel::TO2) return -1;
      return attackers.contains(ratee) ? +1 : -1;
    };
    rating_by_req = overridden(requester, peer_id, rating_by_req);
    rating_by_peer = overridden(peer, req_id, rating_by_peer);

    requester.baseline.update(q, c, cfg.trust.ewma_weight);
    peer.baseline.update(q, c, cfg.trust.ewma_weight);
    requester.history.record_rating(peer_id, rating_by_req);
    requester.history.record_transaction(peer_id);
    peer.history.record_rating(req_id, rating_by_peer);
    peer.history.record_transaction(req_id);

    auto receipt_for = [&](Device& owner, Device& counterpart,
                           bool owner_requests, int rating_on_owner,
                           const pairing::PairingSession& session) {
      server::Receipt fields;
      fields.owner_id = owner.cred.device_id;
      fields.counterpart_id = counterpart.cred.device_id;
      fields.owner_is_requester = owner_requests;
      fields.qos = q;
      fields.credibility = c;
      fields.task_index = task;
      fields.task_value = 1.0;
      fields.timestamp = e.t_start;
      fields.txn_index = owner.next_txn++;
      server::Endorsement end = server::endorse_receipt(
          bs.params(), counterpart.cred, cred::public_part(owner.cred),
          fields, rating_on_owner, rng);
      pending.push_back(server::generate_receipt(session, fields, end));
      CohortTally& tally = owner.attacker ? m.attacker_tally : m.benign_tally;
      (rating_on_owner > 0 ? tally.positive_received
                           : tally.negative_received)++;
      tally.credibility_sum += c;
    };
    receipt_for(requester, peer, true, rating_by_peer, sr);
    receipt_for(peer, requester, false, rating_by_req, sp);

    m.completed_transactions++;
    m.transaction_counts[req_id]++;
    m.transaction_counts[peer_id]++;
    if (!requester.attacker && peer.attacker) {
      fp_cum += 1.0;
      m.fp_series.emplace_back(e.t_start, fp_cum);
    }
  }

  for (;;) {
    const double t = std::min(next_boundary, cfg.duration);
    flush_cycle(t);
    if (t >= cfg.duration) break;
    next_boundary += cfg.cycle_length;
  }

  for (const std::string& id : m.device_ids) {
    m.final_trust_vector[id] = bs.trust_of(id);
    m.final_trust[id] = vector_mean(bs.trust_of(id));
    m.transaction_counts.try_emplace(id, 0);
  }
  m.sigma_bar_final = bs.sigma_bar();
  if (m.fp_series.empty() || m.fp_series.back().first < cfg.duration)
    m.fp_series.emplace_back(cfg.duration, fp_cum);
  return m;
}

}  // namespace

std::vector<TraceEvent> build_trace(const SimConfig& cfg) {
  cfg.validate();
  if (!cfg.trace_path.empty()) return load_trace(cfg.trace_path);
  Rng root(cfg.seed);
  Rng trace_rng = root.fork("trace");
  return synth_trace(cfg.devices, cfg.duration, cfg.contact_rate,
                     cfg.mean_contact, trace_rng);
}

std::set<std::string> choose_attackers(const SimConfig& cfg,
                                       const std::vector<TraceEvent>& trace) {
  cfg.validate();
  if (cfg.attacker_fraction == 0.0) return {};
  std::vector<std::string> ids = trace_devices(trace);
  const std::size_t n = ids.size();
  std::size_t k = static_cast<std::size_t>(
      std::llround(cfg.attacker_fraction * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n - 1);

  if (cfg.attacker_selection == SelectionStrategy::Random) {
    Rng root(cfg.seed);
    Rng pick = root.fork("cohort");
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + pick.below(n - i);
      std::swap(ids[i], ids[j]);
    }
    return {ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k)};
  }

  // rank devices by an honest run of the same trace and seed
  SimConfig honest = cfg;
  honest.attacker_model = AttackerModel::None;
  honest.attacker_fraction = 0.0;
  MetricsRecord base = run_labeled(honest, trace, {});
  std::vector<std::pair<double, std::string>> ranked;
  for (const std::string& id : ids) {
    const double score =
        cfg.attacker_selection == SelectionStrategy::TopTV
            ? base.final_trust.at(id)
            : static_cast<double>(base.transaction_counts.at(id));
    ranked.emplace_back(score, id);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  std::set<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.insert(ranked[i].second);
  return out;
}

MetricsRecord run_on_trace(const SimConfig& cfg,
                           const std::vector<TraceEvent>& trace) {
  cfg.validate();
  return run_labeled(cfg, trace, choose_attackers(cfg, trace));
}

MetricsRecord run(const SimConfig& cfg) {
  const std::vector<TraceEvent> trace = build_trace(cfg);
  return run_on_trace(cfg, trace);
}

}  // namespace tdp::sim
