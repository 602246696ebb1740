#include "run_io.hpp"

#include <cmath>
#include <limits>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "tdp/errors.hpp"

namespace tdp::cli {
namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << content;
}

// cdf.csv holds "cohort,trustvalue" rows; returns the values of one cohort.
std::vector<double> read_cdf_cohort(const std::string& path,
                                    const std::string& cohort) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  std::vector<double> values;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(path + ": bad row");
    if (line.substr(0, comma) == cohort)
      values.push_back(std::stod(line.substr(comma + 1)));
  }
  return values;
}

double number_or_nan(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number())
    return std::numeric_limits<double>::quiet_NaN();
  return it->get<double>();
}

json delta_entry(double baseline, double attack) {
  json entry{{"baseline", baseline}, {"attack", attack}};
  if (std::isnan(baseline) || std::isnan(attack) || baseline == 0.0)
    entry["delta_pct"] = nullptr;
  else
    entry["delta_pct"] = 100.0 * (attack - baseline) / baseline;
  return entry;
}

}  // namespace

sim::SimConfig load_sim_config(const std::string& path) {
  json doc = parse_json(path);
  if (doc.is_object() && doc.contains("config")) doc = doc["config"];
  return sim::SimConfig::from_json_text(doc.dump());
}

void write_run_outputs(const std::string& dir, const sim::SimConfig& cfg,
                       const sim::MetricsRecord& metrics,
                       const std::string& version) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path base(dir);

  json manifest{{"artifact", "tdp"},
                {"version", version},
                {"config", json::parse(cfg.to_json_text())}};
  write_file((base / "manifest.json").string(), manifest.dump(2) + "\n");

  sim::write_cdf_csv(metrics, (base / "cdf.csv").string());
  sim::write_fp_csv(metrics, (base / "fp_timeseries.csv").string());
  sim::write_summary_json(metrics, (base / "summary.json").string());
}

json build_report(const std::string& baseline_dir,
                  const std::string& attack_dir) {
  namespace fs = std::filesystem;
  const json base = parse_json((fs::path(baseline_dir) / "summary.json").string());
  const json attack = parse_json((fs::path(attack_dir) / "summary.json").string());

  json report{
      {"baseline_dir", baseline_dir},
      {"attack_dir", attack_dir},
      {"benign_mean", delta_entry(number_or_nan(base, "benign_mean_trust"),
                                  number_or_nan(attack, "benign_mean_trust"))},
      {"attacker_mean",
       delta_entry(number_or_nan(base, "attacker_mean_trust"),
                   number_or_nan(attack, "attacker_mean_trust"))},
      {"false_positives",
       {{"baseline", number_or_nan(base, "false_positive_total")},
        {"attack", number_or_nan(attack, "false_positive_total")},
        {"delta", number_or_nan(attack, "false_positive_total") -
                      number_or_nan(base, "false_positive_total")}}},
      {"completed_transactions",
       {{"baseline", number_or_nan(base, "completed_transactions")},
        {"attack", number_or_nan(attack, "completed_transactions")}}},
  };

  json distances;
  for (const char* cohort : {"benign", "attacker"}) {
    const auto b =
        read_cdf_cohort((fs::path(baseline_dir) / "cdf.csv").string(), cohort);
    const auto a =
        read_cdf_cohort((fs::path(attack_dir) / "cdf.csv").string(), cohort);
    if (b.empty() || a.empty())
      distances[cohort] = nullptr;
    else
      distances[cohort] = sim::ks_statistic(b, a);
  }
  report["cdf_distance"] = distances;
  return report;
}

}  // namespace tdp::cli
