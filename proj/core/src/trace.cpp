#include "tdp/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "tdp/errors.hpp"

namespace tdp::sim {

namespace {

void canonicalize(TraceEvent& e) {
  if (e.b < e.a) std::swap(e.a, e.b);
}

bool event_order(const TraceEvent& x, const TraceEvent& y) {
  if (x.t_start != y.t_start) return x.t_start < y.t_start;
  if (x.a != y.a) return x.a < y.a;
  if (x.b != y.b) return x.b < y.b;
  return x.t_end < y.t_end;
}

}  // namespace

std::vector<TraceEvent> normalize_trace(std::vector<TraceEvent> events) {
  for (TraceEvent& e : events) {
    canonicalize(e);
    if (!(e.t_start < e.t_end)) {
      throw ParseError("trace event must have t_start < t_end");
    }
    if (e.a == e.b) throw ParseError("trace event links a device to itself");
  }
  if (events.empty()) throw EmptyTrace("trace holds no events");

  // Merge per-pair windows that overlap or touch; a contact reported twice
  // (once per direction) is one physical link.
  std::map<std::pair<std::string, std::string>, std::vector<TraceEvent>> by_pair;
  for (TraceEvent& e : events) {
    by_pair[{e.a, e.b}].push_back(std::move(e));
  }
  std::vector<TraceEvent> merged;
  for (auto& [pair, list] : by_pair) {
    std::sort(list.begin(), list.end(), event_order);
    for (const TraceEvent& e : list) {
      if (!merged.empty() && merged.back().a == e.a &&
          merged.back().b == e.b && e.t_start <= merged.back().t_end) {
        merged.back().t_end = std::max(merged.back().t_end, e.t_end);
      } else {
        merged.push_back(e);
      }
    }
  }
  std::sort(merged.begin(), merged.end(), event_order);
  return merged;
}

std::vector<TraceEvent> load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace: " + path);

  std::vector<TraceEvent> events;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream fields(line);
    TraceEvent e;
    if (!(fields >> e.t_start >> e.t_end >> e.a >> e.b)) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected 't_start t_end node_i node_j'");
    }
    std::string extra;
    if (fields >> extra) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": trailing fields");
    }
    if (!(e.t_start < e.t_end)) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": t_end must exceed t_start");
    }
    if (e.a == e.b) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": self contact");
    }
    events.push_back(std::move(e));
  }
  if (events.empty()) throw EmptyTrace("trace holds no events: " + path);
  return normalize_trace(std::move(events));
}

std::vector<TraceEvent> synth_trace(std::size_t n_devices, double duration,
                                    double contact_rate,
                                    double mean_contact_seconds, Rng& rng) {
  if (n_devices < 2) throw DomainError("synth_trace: need at least 2 devices");
  if (!(duration > 0.0) || !(mean_contact_seconds > 0.0) ||
      !(contact_rate >= 0.0)) {
    throw DomainError("synth_trace: nonpositive parameter");
  }

  int width = n_devices > 100 ? 3 : 2;
  auto name = [&](std::size_t i) {
    std::string digits = std::to_string(i);
    return "d" + std::string(width - std::min<std::size_t>(width, digits.size()),
                             '0') +
           digits;
  };

  std::vector<TraceEvent> events;
  if (contact_rate > 0.0) {
    for (std::size_t i = 0; i < n_devices; ++i) {
      for (std::size_t j = i + 1; j < n_devices; ++j) {
        double t = rng.exponential(contact_rate);
        while (t < duration) {
          double len = rng.exponential(1.0 / mean_contact_seconds);
          double end = std::min(t + len, duration);
          if (end > t) {
            events.push_back(TraceEvent{t, end, name(i), name(j)});
          }
          t = end + rng.exponential(contact_rate);
        }
      }
    }
  }
  if (events.empty()) return events;
  return normalize_trace(std::move(events));
}

std::vector<std::string> trace_devices(const std::vector<TraceEvent>& events) {
  std::set<std::string> ids;
  for (const TraceEvent& e : events) {
    ids.insert(e.a);
    ids.insert(e.b);
  }
  return std::vector<std::string>(ids.begin(), ids.end());
}

double duration_p95(const std::vector<TraceEvent>& events) {
  if (events.empty()) throw EmptyTrace("duration_p95: no events");
  std::vector<double> lengths;
  lengths.reserve(events.size());
  for (const TraceEvent& e : events) lengths.push_back(e.t_end - e.t_start);
  std::sort(lengths.begin(), lengths.end());
  auto idx = static_cast<std::size_t>(
      std::ceil(0.95 * static_cast<double>(lengths.size()))) ;
  if (idx > 0) --idx;
  return lengths[idx];
}

}  // namespace tdp::sim
