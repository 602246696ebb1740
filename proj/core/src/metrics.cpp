#include "tdp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "tdp/errors.hpp"

namespace tdp::sim {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error("short write to " + path);
}

}  // namespace

std::vector<double> MetricsRecord::cohort_final(bool attacker_cohort) const {
  std::vector<double> out;
  for (const auto& [id, value] : final_trust) {
    if (attackers.contains(id) == attacker_cohort) out.push_back(value);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double MetricsRecord::cohort_mean(bool attacker_cohort) const {
  return mean_of(cohort_final(attacker_cohort));
}

double MetricsRecord::fp_total() const {
  return fp_series.empty() ? 0.0 : fp_series.back().second;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    throw DomainError("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double sup = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    sup = std::max(sup, std::fabs(static_cast<double>(i) / na -
                                  static_cast<double>(j) / nb));
  }
  return sup;
}

void write_cdf_csv(const MetricsRecord& m, const std::string& path) {
  std::string text = "cohort,trustvalue\n";
  for (double v : m.cohort_final(false))
    text += "benign," + fmt_double(v) + "\n";
  for (double v : m.cohort_final(true))
    text += "attacker," + fmt_double(v) + "\n";
  write_text(path, text);
}

void write_fp_csv(const MetricsRecord& m, const std::string& path) {
  std::string text = "time,cumulative_count\n";
  for (const auto& [t, count] : m.fp_series)
    text += fmt_double(t) + "," + fmt_double(count) + "\n";
  write_text(path, text);
}

std::string summary_json(const MetricsRecord& m) {
  nlohmann::json j;
  j["devices"] = m.device_ids.size();
  j["attackers"] = m.attackers.size();
  j["completed_transactions"] = m.completed_transactions;
  j["receipts_accepted"] = m.receipts_accepted;
  j["receipts_rejected"] = m.receipts_rejected;
  j["skipped_windows"] = m.skipped_windows;
  j["no_candidate_windows"] = m.no_candidate_windows;
  j["failed_pairings"] = m.failed_pairings;
  j["forged_advertisements"] = m.forged_advertisements;
  j["forged_selected"] = m.forged_selected;
  j["attacker_override_draws"] = m.attacker_override_draws;
  j["attacker_overrides"] = m.attacker_overrides;
  j["cycles"] = m.cycles;
  j["sigma_bar_final"] = m.sigma_bar_final;
  j["benign_mean_trust"] = m.cohort_mean(false);
  j["attacker_mean_trust"] = m.cohort_mean(true);
  j["false_positive_total"] = m.fp_total();
  auto tally_json = [](const CohortTally& t) {
    nlohmann::json v;
    v["positive_received"] = t.positive_received;
    v["negative_received"] = t.negative_received;
    v["mean_credibility"] = t.mean_credibility();
    return v;
  };
  j["benign_receipts"] = tally_json(m.benign_tally);
  j["attacker_receipts"] = tally_json(m.attacker_tally);
  nlohmann::json per;
  for (const auto& [id, value] : m.final_trust) {
    per[id]["trust"] = value;
    per[id]["transactions"] =
        m.transaction_counts.contains(id) ? m.transaction_counts.at(id) : 0;
    per[id]["attacker"] = m.attackers.contains(id);
  }
  j["per_device"] = per;
  return j.dump(2) + "\n";
}

void write_summary_json(const MetricsRecord& m, const std::string& path) {
  write_text(path, summary_json(m));
}

std::string comparison_json(const MetricsRecord& baseline,
                            const MetricsRecord& attack) {
  nlohmann::json j;
  auto pct_delta = [](double before, double after) -> nlohmann::json {
    if (!std::isfinite(before) || !std::isfinite(after) || before == 0.0)
      return nullptr;
    return 100.0 * (after - before) / before;
  };
  const double bb = baseline.cohort_mean(false);
  const double ba = attack.cohort_mean(false);
  const double ab = baseline.cohort_mean(true);
  const double aa = attack.cohort_mean(true);
  j["benign_mean_baseline"] = bb;
  j["benign_mean_attack"] = ba;
  j["benign_delta_pct"] = pct_delta(bb, ba);
  j["attacker_mean_baseline"] = ab;
  j["attacker_mean_attack"] = aa;
  j["attacker_delta_pct"] = pct_delta(ab, aa);
  j["fp_total_baseline"] = baseline.fp_total();
  j["fp_total_attack"] = attack.fp_total();
  j["completed_baseline"] = baseline.completed_transactions;
  j["completed_attack"] = attack.completed_transactions;
  const auto bf = baseline.cohort_final(false);
  const auto af = attack.cohort_final(false);
  j["benign_ks"] = (bf.empty() || af.empty())
                       ? nlohmann::json(nullptr)
                       : nlohmann::json(ks_statistic(bf, af));
  return j.dump(2) + "\n";
}

}  // namespace tdp::sim
