#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tdp/trust.hpp"

namespace tdp::sim {

// Everything a simulation run measures. The attacker set is a labeling: it
// is populated whenever an attacker fraction was configured, even for runs
// where the labeled devices behave honestly, so baseline and attack runs
// stay comparable cohort by cohort.
// Ratings received and credibility carried by one cohort's receipts.
struct CohortTally {
  std::uint64_t positive_received = 0;
  std::uint64_t negative_received = 0;
  double credibility_sum = 0.0;

  double mean_credibility() const {
    const std::uint64_t n = positive_received + negative_received;
    return n ? credibility_sum / static_cast<double>(n) : 0.0;
  }
};

struct MetricsRecord {
  std::vector<std::string> device_ids;  // sorted
  std::set<std::string> attackers;

  CohortTally benign_tally;
  CohortTally attacker_tally;

  std::map<std::string, double> final_trust;  // mean over task entries
  std::map<std::string, trust::TrustVector> final_trust_vector;
  std::map<std::string, std::uint64_t> transaction_counts;

  // cumulative transactions attracted by labeled devices from benign
  // requesters, sampled at each such transaction plus a final point
  std::vector<std::pair<double, double>> fp_series;

  std::uint64_t completed_transactions = 0;
  std::uint64_t receipts_accepted = 0;
  std::uint64_t receipts_rejected = 0;
  std::uint64_t skipped_windows = 0;
  std::uint64_t no_candidate_windows = 0;
  std::uint64_t failed_pairings = 0;
  std::uint64_t forged_advertisements = 0;
  std::uint64_t forged_selected = 0;
  std::uint64_t attacker_override_draws = 0;  // chances an attacker had
  std::uint64_t attacker_overrides = 0;       // chances that fired
  std::uint64_t cycles = 0;
  double sigma_bar_final = 0.0;

  // mean trust per device sampled at every cycle boundary
  std::vector<std::map<std::string, double>> trust_by_cycle;

  // Sorted final trust values of one cohort.
  std::vector<double> cohort_final(bool attacker_cohort) const;
  // Mean of that cohort; NaN when the cohort is empty.
  double cohort_mean(bool attacker_cohort) const;
  double fp_total() const;
};

// Two-sample Kolmogorov-Smirnov statistic, sup_x |F_a(x) - F_b(x)|.
// Throws DomainError when either sample is empty.
double ks_statistic(std::vector<double> a, std::vector<double> b);

// cdf.csv: header "cohort,trustvalue", one row per device, values sorted
// within each cohort. Doubles use %.17g so identical runs emit identical
// bytes.
void write_cdf_csv(const MetricsRecord& m, const std::string& path);
// fp_timeseries.csv: header "time,cumulative_count".
void write_fp_csv(const MetricsRecord& m, const std::string& path);

std::string summary_json(const MetricsRecord& m);
void write_summary_json(const MetricsRecord& m, const std::string& path);

// Relative comparison of an attack run against its baseline: cohort mean
// deltas (percent), false-positive totals, and the benign-cohort KS
// distance.
std::string comparison_json(const MetricsRecord& baseline,
                            const MetricsRecord& attack);

}  // namespace tdp::sim
