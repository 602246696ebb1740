#pragma once

#include <string>

#include <json.hpp>

#include "tdp/metrics.hpp"
#include "tdp/sim_config.hpp"

namespace tdp::cli {

// Reads a simulation config from `path`. The file is either a plain config
// or a manifest from an earlier run (detected by its top-level "config"
// key), so any run can be reproduced by pointing sim at its own manifest.
sim::SimConfig load_sim_config(const std::string& path);

// Writes the standard artifact set for one finished run into `dir`
// (creating it): manifest.json, cdf.csv, fp_timeseries.csv, summary.json.
void write_run_outputs(const std::string& dir, const sim::SimConfig& cfg,
                       const sim::MetricsRecord& metrics,
                       const std::string& version);

// Compares two finished run directories (each produced by write_run_outputs)
// on the headline metrics: cohort mean deltas, false-positive totals, and
// the KS distance between the trustvalue CDFs.
nlohmann::json build_report(const std::string& baseline_dir,
                            const std::string& attack_dir);

}  // namespace tdp::cli
