#pragma once

#include <set>
#include <string>
#include <vector>

#include "tdp/metrics.hpp"
#include "tdp/sim_config.hpp"
#include "tdp/trace.hpp"

namespace tdp::sim {

// Builds the trace the config describes: loads trace_path when set,
// otherwise synthesizes one from the seed and the synthetic-trace fields.
std::vector<TraceEvent> build_trace(const SimConfig& cfg);

// The attacker cohort for this config and trace. Deterministic in the seed:
// Random samples directly, TopTV/TopTC rank devices by an internal
// honest-everyone run on the same trace. Empty when attacker_fraction is 0.
std::set<std::string> choose_attackers(const SimConfig& cfg,
                                       const std::vector<TraceEvent>& trace);

// Runs the full pipeline on an already-normalized trace: enrollment,
// discovery, peer selection, the pairing handshake, mutual rating, receipt
// endorsement, and cycle-boundary uploads to the trust engine.
MetricsRecord run_on_trace(const SimConfig& cfg,
                           const std::vector<TraceEvent>& trace);

// build_trace + choose_attackers + run_on_trace.
MetricsRecord run(const SimConfig& cfg);

}  // namespace tdp::sim
