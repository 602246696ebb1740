#pragma once

#include <cstdint>
#include <string>

#include "tdp/trust.hpp"

namespace tdp::sim {

// Traffic-oriented adversary models. None runs everyone honestly; TO1
// advertises forged trustvalues at selection time; TO2 rates every peer
// negatively; TO3 rates fellow attackers positively and everyone else
// negatively.
enum class AttackerModel { None, TO1, TO2, TO3 };

// How the attacker cohort is chosen: uniformly at random, by highest mean
// trustvalue in a baseline run, or by highest transaction count in a
// baseline run.
enum class SelectionStrategy { Random, TopTV, TopTC };

enum class QosModel { ContactDuration, DataVolume, Constant };

const char* to_string(AttackerModel m);
const char* to_string(SelectionStrategy s);
const char* to_string(QosModel q);
AttackerModel attacker_model_from_string(const std::string& s);
SelectionStrategy selection_from_string(const std::string& s);
QosModel qos_model_from_string(const std::string& s);

struct SimConfig {
  // empty trace_path generates a synthetic trace from the three fields below
  std::string trace_path;
  std::size_t devices = 40;
  double contact_rate = 9.4e-5;  // per-pair contacts per second
  double mean_contact = 600.0;   // seconds

  double duration = 30000.0;
  std::uint64_t seed = 1;

  AttackerModel attacker_model = AttackerModel::None;
  SelectionStrategy attacker_selection = SelectionStrategy::Random;
  double attacker_fraction = 0.0;  // share of devices marked as attackers
  double attack_intensity = 1.0;   // per-transaction override probability

  QosModel qos_model = QosModel::ContactDuration;
  double qos_constant = 0.8;  // QosModel::Constant only
  double data_rate = 1.0;     // QosModel::DataVolume only

  double cycle_length = 3000.0;  // trust management cycle, seconds
  double min_contact = 1.0;      // windows shorter than this are skipped

  trust::TrustParams trust;

  // Throws ConfigError on any out-of-range or inconsistent field.
  void validate() const;

  // JSON round trip. Parsing applies defaults for absent keys, so a config
  // file only states what it changes; serialization is fully resolved and
  // reproduces the run from the manifest alone.
  static SimConfig from_json_text(const std::string& text);
  static SimConfig from_json_file(const std::string& path);
  std::string to_json_text() const;
};

}  // namespace tdp::sim
