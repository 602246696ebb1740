#include "tdp/sim_config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tdp/errors.hpp"

namespace tdp::sim {

using nlohmann::json;

const char* to_string(AttackerModel m) {
  switch (m) {
    case AttackerModel::None: return "none";
    case AttackerModel::TO1: return "to1";
    case AttackerModel::TO2: return "to2";
    case AttackerModel::TO3: return "to3";
  }
  return "?";
}

const char* to_string(SelectionStrategy s) {
  switch (s) {
    case SelectionStrategy::Random: return "random";
    case SelectionStrategy::TopTV: return "top_tv";
    case SelectionStrategy::TopTC: return "top_tc";
  }
  return "?";
}

const char* to_string(QosModel q) {
  switch (q) {
    case QosModel::ContactDuration: return "contact_duration";
    case QosModel::DataVolume: return "data_volume";
    case QosModel::Constant: return "constant";
  }
  return "?";
}

AttackerModel attacker_model_from_string(const std::string& s) {
  if (s == "none") return AttackerModel::None;
  if (s == "to1") return AttackerModel::TO1;
  if (s == "to2") return AttackerModel::TO2;
  if (s == "to3") return AttackerModel::TO3;
  throw ConfigError("unknown attacker model: " + s);
}

SelectionStrategy selection_from_string(const std::string& s) {
  if (s == "random") return SelectionStrategy::Random;
  if (s == "top_tv") return SelectionStrategy::TopTV;
  if (s == "top_tc") return SelectionStrategy::TopTC;
  throw ConfigError("unknown attacker selection: " + s);
}

QosModel qos_model_from_string(const std::string& s) {
  if (s == "contact_duration") return QosModel::ContactDuration;
  if (s == "data_volume") return QosModel::DataVolume;
  if (s == "constant") return QosModel::Constant;
  throw ConfigError("unknown qos model: " + s);
}

void SimConfig::validate() const {
  if (!(duration > 0.0)) throw ConfigError("duration must be positive");
  if (!(cycle_length > 0.0)) throw ConfigError("cycle_length must be positive");
  if (trace_path.empty()) {
    if (devices < 2) throw ConfigError("synthetic trace needs >= 2 devices");
    if (!(contact_rate >= 0.0)) throw ConfigError("contact_rate < 0");
    if (!(mean_contact > 0.0)) throw ConfigError("mean_contact must be positive");
  }
  if (attacker_fraction != 0.0 &&
      !(attacker_fraction > 0.0 && attacker_fraction < 1.0)) {
    throw ConfigError("attacker_fraction must lie in (0,1)");
  }
  if (attacker_model != AttackerModel::None && attacker_fraction == 0.0) {
    throw ConfigError("attacker model set but attacker_fraction is 0");
  }
  if (!(attack_intensity >= 0.0 && attack_intensity <= 1.0)) {
    throw ConfigError("attack_intensity must lie in [0,1]");
  }
  if (!(qos_constant >= 0.0 && qos_constant <= 1.0)) {
    throw ConfigError("qos_constant must lie in [0,1]");
  }
  if (!(data_rate > 0.0)) throw ConfigError("data_rate must be positive");
  if (!(min_contact >= 0.0)) throw ConfigError("min_contact < 0");
  trust.validate();
}

SimConfig SimConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("sim config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("sim config: not an object");

  SimConfig c;
  try {
    c.trace_path = j.value("trace_path", c.trace_path);
    c.devices = j.value("devices", c.devices);
    c.contact_rate = j.value("contact_rate", c.contact_rate);
    c.mean_contact = j.value("mean_contact", c.mean_contact);
    c.duration = j.value("duration", c.duration);
    c.seed = j.value("seed", c.seed);
    if (j.contains("attacker_model")) {
      c.attacker_model =
          attacker_model_from_string(j["attacker_model"].get<std::string>());
    }
    if (j.contains("attacker_selection")) {
      c.attacker_selection =
          selection_from_string(j["attacker_selection"].get<std::string>());
    }
    c.attacker_fraction = j.value("attacker_fraction", c.attacker_fraction);
    c.attack_intensity = j.value("attack_intensity", c.attack_intensity);
    if (j.contains("qos_model")) {
      c.qos_model = qos_model_from_string(j["qos_model"].get<std::string>());
    }
    c.qos_constant = j.value("qos_constant", c.qos_constant);
    c.data_rate = j.value("data_rate", c.data_rate);
    c.cycle_length = j.value("cycle_length", c.cycle_length);
    c.min_contact = j.value("min_contact", c.min_contact);
    if (j.contains("trust")) {
      c.trust = trust::TrustParams::from_json_text(j["trust"].dump());
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sim config: ") + e.what());
  }
  c.validate();
  return c;
}

SimConfig SimConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string SimConfig::to_json_text() const {
  json j;
  j["trace_path"] = trace_path;
  j["devices"] = devices;
  j["contact_rate"] = contact_rate;
  j["mean_contact"] = mean_contact;
  j["duration"] = duration;
  j["seed"] = seed;
  j["attacker_model"] = to_string(attacker_model);
  j["attacker_selection"] = to_string(attacker_selection);
  j["attacker_fraction"] = attacker_fraction;
  j["attack_intensity"] = attack_intensity;
  j["qos_model"] = to_string(qos_model);
  j["qos_constant"] = qos_constant;
  j["data_rate"] = data_rate;
  j["cycle_length"] = cycle_length;
  j["min_contact"] = min_contact;
  j["trust"] = json::parse(trust.to_json_text());
  return j.dump(2);
}

}  // namespace tdp::sim
