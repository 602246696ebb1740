#pragma once

#include <string>
#include <vector>

#include "tdp/rng.hpp"

namespace tdp::sim {

// One pairwise contact window. Pairs are stored canonically (a < b) since
// links are symmetric.
struct TraceEvent {
  double t_start = 0.0;
  double t_end = 0.0;
  std::string a;
  std::string b;
};

// Reads a contact trace: one event per line, whitespace-separated
//   t_start t_end node_i node_j
// Blank lines and lines starting with '#' are skipped. Events come back
// sorted by start time with symmetric duplicates ((i,j) vs (j,i)) and
// overlapping or touching windows of the same pair merged into one.
// Throws ParseError naming the line, or EmptyTrace when nothing survives.
std::vector<TraceEvent> load_trace(const std::string& path);

// Same validation and normalization for events built in memory.
std::vector<TraceEvent> normalize_trace(std::vector<TraceEvent> events);

// Homogeneous Poisson contact process: every unordered device pair meets at
// `contact_rate` events per second, each contact lasting an exponential time
// with the given mean, truncated at `duration`. Device ids are zero-padded
// ("d00", "d01", ...) so lexicographic order matches numeric order.
std::vector<TraceEvent> synth_trace(std::size_t n_devices, double duration,
                                    double contact_rate,
                                    double mean_contact_seconds, Rng& rng);

// Sorted unique device ids appearing in the trace.
std::vector<std::string> trace_devices(const std::vector<TraceEvent>& events);

// 95th percentile of window durations; the QoS normalization scale.
// Throws EmptyTrace for an empty list.
double duration_p95(const std::vector<TraceEvent>& events);

}  // namespace tdp::sim
