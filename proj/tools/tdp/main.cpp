#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "attacks.hpp"
#include "run_io.hpp"
#include "tdp/errors.hpp"
#include "tdp/pairing.hpp"
#include "tdp/receipt.hpp"
#include "tdp/server.hpp"
#include "tdp/simulator.hpp"
#include "tdp/trust.hpp"

#ifndef TDP_VERSION
#define TDP_VERSION "0.0.0"
#endif

namespace {

using nlohmann::json;
using namespace tdp;

int cmd_solve_params(double sigma_bar, double positive_prob, double avg_delta) {
  double c_g = 0.0;
  try {
    c_g = trust::solve_cg(sigma_bar, positive_prob, avg_delta);
  } catch (const Error& e) {
    std::fprintf(stderr, "solve-params: %s\n", e.what());
    return 2;
  }
  const double c_w = trust::solve_cw();
  const std::uint64_t cutoff = trust::damping_cutoff(sigma_bar, c_w);
  const double x_star = sigma_bar * positive_prob * avg_delta;
  const double residual =
      std::fabs(trust::gompertz_third_derivative(x_star, c_g));

  std::printf("sigma_bar            = %g\n", sigma_bar);
  std::printf("x*                   = %g\n", x_star);
  std::printf("c_g                  = %.6f\n", c_g);
  std::printf("c_w                  = %.6f\n", c_w);
  std::printf("damping cutoff       = %llu\n",
              static_cast<unsigned long long>(cutoff));
  std::printf("g''' residual at x*  = %.3e\n", residual);
  return 0;
}

int cmd_demo_pairing(std::uint64_t seed) {
  Rng rng(seed);
  server::BsEngine bs(crypto::Group::secp160r1(), trust::TrustParams{}, rng);
  std::printf("enrolling alice, bob and carol with the backend\n");
  cred::Credential alice = server::enroll_local_device(bs, "alice", rng);
  cred::Credential bob = server::enroll_local_device(bs, "bob", rng);
  cred::Credential carol = server::enroll_local_device(bs, "carol", rng);

  std::vector<pairing::PeerCandidate> candidates;
  for (const auto* c : {&bob, &carol})
    candidates.push_back({cred::public_part(*c), bs.trust_of(c->device_id),
                          bs.sign_trust(c->device_id, rng)});
  const std::string peer_id = pairing::select_peer(bs.params(), candidates, 0);
  std::printf("alice verified both advertisements and picked: %s\n",
              peer_id.c_str());

  cred::Credential& peer = peer_id == "bob" ? bob : carol;
  pairing::PairingSession a(bs.params(), alice, pairing::Role::Initiator, rng);
  pairing::PairingSession b(bs.params(), peer, pairing::Role::Responder, rng);

  b.receive_key_share(a.key_share());
  a.receive_key_share(b.key_share());
  std::printf("key shares exchanged: alice=%s peer=%s\n",
              to_string(a.state()), to_string(b.state()));

  auto challenge = a.make_challenge(rng);
  auto response = b.answer_challenge(challenge, rng);
  if (!response) {
    std::fprintf(stderr, "challenge failed: %s\n", to_string(b.failure()));
    return 1;
  }
  auto confirm = a.check_response(*response, rng);
  if (!confirm || !b.accept_confirm(*confirm)) {
    std::fprintf(stderr, "confirmation failed\n");
    return 1;
  }
  const bool key_match = a.session_key() == b.session_key();
  std::printf("challenge-response complete: alice=%s peer=%s, keys %s\n",
              to_string(a.state()), to_string(b.state()),
              key_match ? "match" : "MISMATCH");
  if (!key_match) return 1;

  server::Receipt fields;
  fields.owner_id = alice.device_id;
  fields.counterpart_id = peer.device_id;
  fields.owner_is_requester = true;
  fields.qos = 0.8;
  fields.credibility = 1.0;
  fields.task_index = 0;
  fields.timestamp = 0.0;
  fields.txn_index = 0;
  server::Endorsement endorsement = server::endorse_receipt(
      bs.params(), peer, cred::public_part(alice), fields, +1, rng);
  server::Receipt receipt = server::generate_receipt(a, fields, endorsement);
  std::printf("peer endorsed a receipt for the transaction\n");

  if (!bs.verify_receipt(receipt)) {
    std::fprintf(stderr, "backend rejected the receipt\n");
    return 1;
  }
  const double before = bs.trust_of(alice.device_id)[0];
  trust::TrustVector updated = bs.adjust_trust(receipt);
  std::printf("backend verified the receipt; alice trust[0]: %.6f -> %.6f\n",
              before, updated[0]);

  server::TrustSignature att = bs.sign_trust(alice.device_id, rng);
  const bool verified =
      bs.verify_trust_signature(alice.device_id, updated, att);
  std::printf("fresh attestation over the new value verifies: %s\n",
              verified ? "yes" : "NO");
  return verified ? 0 : 1;
}

int cmd_attack_test(const std::string& scenario, int trials,
                    std::uint64_t seed, const std::string& out_dir) {
  const cli::ScenarioResult res =
      cli::run_attack_scenario(scenario, trials, seed);
  std::printf("%s: %d violation(s) in %d trial(s) -> %s\n",
              res.scenario.c_str(), res.violations, res.trials,
              res.passed ? "PASS" : "FAIL");
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const auto path =
        (std::filesystem::path(out_dir) / "attack_report.json").string();
    json report{{"scenario", res.scenario},
                {"trials", res.trials},
                {"violations", res.violations},
                {"passed", res.passed},
                {"detail", res.detail}};
    std::ofstream out(path, std::ios::trunc);
    out << report.dump(2) << "\n";
    std::printf("report written to %s\n", path.c_str());
  }
  return res.passed ? 0 : 1;
}

struct SimJob {
  std::string config_path;
  std::string out_dir;
  std::string config_json;
  std::string log;
  bool ok = false;
};

void apply_overrides(CLI::App* sim, sim::SimConfig& cfg,
                     std::uint64_t seed, std::size_t devices, double duration,
                     double cycle_length, const std::string& attacker_model,
                     double attacker_fraction, double attack_intensity,
                     const std::string& qos_model, const std::string& trace) {
  if (sim->count("--seed")) cfg.seed = seed;
  if (sim->count("--devices")) cfg.devices = devices;
  if (sim->count("--duration")) cfg.duration = duration;
  if (sim->count("--cycle-length")) cfg.cycle_length = cycle_length;
  if (sim->count("--attacker-model"))
    cfg.attacker_model = sim::attacker_model_from_string(attacker_model);
  if (sim->count("--attacker-fraction"))
    cfg.attacker_fraction = attacker_fraction;
  if (sim->count("--attack-intensity")) cfg.attack_intensity = attack_intensity;
  if (sim->count("--qos-model"))
    cfg.qos_model = sim::qos_model_from_string(qos_model);
  if (sim->count("--trace")) cfg.trace_path = trace;
}

void run_sim_job(SimJob& job) {
  try {
    sim::SimConfig cfg = sim::SimConfig::from_json_text(job.config_json);
    const sim::MetricsRecord m = sim::run(cfg);
    cli::write_run_outputs(job.out_dir, cfg, m, TDP_VERSION);
    char line[256];
    std::snprintf(line, sizeof line,
                  "%s: completed=%llu accepted=%llu benign_mean=%.4f "
                  "attacker_mean=%.4f",
                  job.out_dir.c_str(),
                  static_cast<unsigned long long>(m.completed_transactions),
                  static_cast<unsigned long long>(m.receipts_accepted),
                  m.cohort_mean(false), m.cohort_mean(true));
    job.log = line;
    job.ok = true;
  } catch (const std::exception& e) {
    job.log = job.config_path + ": " + e.what();
    job.ok = false;
  }
}

int cmd_report(const std::string& baseline_dir, const std::string& attack_dir,
               const std::string& out_file) {
  const json report = cli::build_report(baseline_dir, attack_dir);
  const std::string text = report.dump(2) + "\n";
  std::fputs(text.c_str(), stdout);
  if (!out_file.empty()) {
    std::ofstream out(out_file, std::ios::trunc);
    out << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"device-to-device pairing and trust management harness"};
  app.set_version_flag("--version", TDP_VERSION);
  app.require_subcommand(1);

  // solve-params
  double sigma_bar = 0.0, positive_prob = 0.5, avg_delta = 0.125;
  CLI::App* solve =
      app.add_subcommand("solve-params", "solve the sigmoid and damping "
                                         "parameters for a cycle profile");
  solve->add_option("--sigma-bar", sigma_bar,
                    "expected per-device transactions per cycle")
      ->required();
  solve->add_option("--positive-prob", positive_prob,
                    "expected share of positive ratings");
  solve->add_option("--avg-delta", avg_delta,
                    "expected trust adjustment per positive transaction");

  // demo-pairing
  std::uint64_t demo_seed = 1;
  CLI::App* demo = app.add_subcommand(
      "demo-pairing", "walk one full pairing, receipt and attestation flow");
  demo->add_option("--seed", demo_seed, "rng seed");

  // attack-test
  std::string scenario;
  int trials = 200;
  std::uint64_t attack_seed = 7;
  std::string attack_out;
  CLI::App* attack = app.add_subcommand(
      "attack-test", "run one adversarial scenario and report pass/fail");
  attack
      ->add_option("scenario", scenario,
                   "one of co1, co2, co3, to1, to2, to3")
      ->required()
      ->check(CLI::IsMember({"co1", "co2", "co3", "to1", "to2", "to3"}));
  attack->add_option("--trials", trials, "handshake scenario repetitions")
      ->check(CLI::PositiveNumber);
  attack->add_option("--seed", attack_seed, "rng seed");
  attack->add_option("-o,--out", attack_out,
                     "directory for attack_report.json");

  // sim
  std::vector<std::string> config_paths;
  std::string sim_out = "sim-out";
  unsigned jobs = 1;
  std::uint64_t sim_seed = 0;
  std::size_t sim_devices = 0;
  double sim_duration = 0.0, sim_cycle = 0.0;
  double sim_fraction = 0.0, sim_intensity = 0.0;
  std::string sim_model, sim_qos, sim_trace;
  CLI::App* simc = app.add_subcommand(
      "sim", "run trace-driven simulations and emit metrics files");
  simc->add_option("--config", config_paths,
                   "config or manifest file (repeat for a batch)")
      ->required();
  simc->add_option("-o,--out", sim_out,
                   "output directory (per-config subdirectories for a batch)");
  simc->add_option("--jobs", jobs, "parallel workers for a batch")
      ->check(CLI::PositiveNumber);
  simc->add_option("--seed", sim_seed, "override: rng seed");
  simc->add_option("--devices", sim_devices, "override: device count");
  simc->add_option("--duration", sim_duration, "override: seconds simulated");
  simc->add_option("--cycle-length", sim_cycle,
                   "override: trust cycle length in seconds");
  simc->add_option("--attacker-model", sim_model,
                   "override: none, to1, to2 or to3");
  simc->add_option("--attacker-fraction", sim_fraction,
                   "override: attacker share of devices");
  simc->add_option("--attack-intensity", sim_intensity,
                   "override: per-transaction attack probability");
  simc->add_option("--qos-model", sim_qos,
                   "override: contact_duration, data_volume or constant");
  simc->add_option("--trace", sim_trace, "override: contact trace file");

  // report
  std::string baseline_dir, attack_dir, report_out;
  CLI::App* report = app.add_subcommand(
      "report", "compare a baseline run directory against an attack run");
  report->add_option("baseline", baseline_dir, "baseline run directory")
      ->required();
  report->add_option("attack", attack_dir, "attack run directory")->required();
  report->add_option("-o,--out", report_out, "also write the report here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed())
      return cmd_solve_params(sigma_bar, positive_prob, avg_delta);
    if (demo->parsed()) return cmd_demo_pairing(demo_seed);
    if (attack->parsed())
      return cmd_attack_test(scenario, trials, attack_seed, attack_out);
    if (report->parsed())
      return cmd_report(baseline_dir, attack_dir, report_out);

    // sim: resolve configs up front so a bad file fails the whole batch
    // before any run starts
    std::vector<SimJob> batch;
    const bool single = config_paths.size() == 1;
    std::set<std::string> used_names;
    for (const std::string& path : config_paths) {
      sim::SimConfig cfg = cli::load_sim_config(path);
      apply_overrides(simc, cfg, sim_seed, sim_devices, sim_duration,
                      sim_cycle, sim_model, sim_fraction, sim_intensity,
                      sim_qos, sim_trace);
      cfg.validate();
      std::string dir = sim_out;
      if (!single) {
        std::string stem = std::filesystem::path(path).stem().string();
        std::string name = stem;
        for (int n = 2; !used_names.insert(name).second; ++n)
          name = stem + "-" + std::to_string(n);
        dir = (std::filesystem::path(sim_out) / name).string();
      }
      // the resolved config rides along as JSON so workers stay independent
      batch.push_back({path, dir, cfg.to_json_text(), "", false});
    }

    if (jobs <= 1 || batch.size() <= 1) {
      for (SimJob& job : batch) run_sim_job(job);
    } else {
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t i = next++; i < batch.size(); i = next++)
          run_sim_job(batch[i]);
      };
      std::vector<std::thread> pool;
      const unsigned n = std::min<std::size_t>(jobs, batch.size());
      pool.reserve(n);
      for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
      for (std::thread& t : pool) t.join();
    }

    int failures = 0;
    for (const SimJob& job : batch) {
      std::printf("%s\n", job.log.c_str());
      if (!job.ok) failures++;
    }
    return failures == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
