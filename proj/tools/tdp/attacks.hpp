#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace tdp::cli {

// Outcome of one adversarial scenario. `violations` counts trials where the
// attack achieved what it must not (a confirmed session, a selected forger,
// an opened ciphertext, ...); the scenario passes only at zero, plus any
// scenario-specific side conditions folded into `passed`.
struct ScenarioResult {
  std::string scenario;
  int trials = 0;
  int violations = 0;
  bool passed = false;
  nlohmann::json detail;
};

// Valid names: co1, co2, co3, to1, to2, to3. Throws tdp::DomainError on
// anything else. `trials` applies to the per-handshake scenarios (co1-co3,
// to1); the simulation-backed ones (to2, to3) run fixed deterministic
// setups and ignore it.
ScenarioResult run_attack_scenario(const std::string& name, int trials,
                                   std::uint64_t seed);

}  // namespace tdp::cli
