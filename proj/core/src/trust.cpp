#include "tdp/trust.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tdp/errors.hpp"

namespace tdp::trust {

using nlohmann::json;

//
// parameters
//

std::size_t TrustParams::task_index(const std::string& name) const {
  for (std::size_t i = 0; i < task_types.size(); ++i) {
    if (task_types[i].name == name) return i;
  }
  throw UnknownTaskType("no such task type: " + name);
}

void TrustParams::validate() const {
  if (!(c_g > 0.0)) throw ConfigError("c_g must be positive");
  if (!(c_w > 0.0)) throw ConfigError("c_w must be positive");
  if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must be in [0,1]");
  if (beta < 0.0 || beta > 1.0) throw ConfigError("beta must be in [0,1]");
  if (!(sigma_bar > 0.0)) throw ConfigError("sigma_bar must be positive");
  if (!(ewma_weight > 0.0) || ewma_weight > 1.0) {
    throw ConfigError("ewma_weight must be in (0,1]");
  }
  if (task_types.empty()) throw ConfigError("at least one task type required");
  std::set<std::string> names;
  for (const TaskType& t : task_types) {
    if (t.name.empty()) throw ConfigError("task type name must be nonempty");
    if (!names.insert(t.name).second) {
      throw ConfigError("duplicate task type: " + t.name);
    }
    for (int bit : t.pattern) {
      if (bit != 0 && bit != 1) {
        throw ConfigError("pattern entries must be 0 or 1 for task " + t.name);
      }
    }
  }
}

namespace {

double get_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) {
    throw ConfigError(std::string(key) + " must be a number");
  }
  return j[key].get<double>();
}

TrustParams params_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("trust params must be a JSON object");
  TrustParams p;
  p.c_g = get_number(j, "c_g", p.c_g);
  p.c_w = get_number(j, "c_w", p.c_w);
  p.alpha = get_number(j, "alpha", p.alpha);
  p.beta = get_number(j, "beta", p.beta);
  p.sigma_bar = get_number(j, "sigma_bar", p.sigma_bar);
  p.ewma_weight = get_number(j, "ewma_weight", p.ewma_weight);

  if (j.contains("task_types")) {
    if (!j["task_types"].is_array() || j["task_types"].empty()) {
      throw ConfigError("task_types must be a nonempty array");
    }
    p.task_types.clear();
    for (const json& name : j["task_types"]) {
      if (!name.is_string()) throw ConfigError("task type names are strings");
      p.task_types.push_back(TaskType{name.get<std::string>(), {1, 1}});
    }
  }
  if (j.contains("pattern_map")) {
    if (!j["pattern_map"].is_object()) {
      throw ConfigError("pattern_map must be an object");
    }
    for (auto& [name, pat] : j["pattern_map"].items()) {
      if (!pat.is_array() || pat.size() != 2) {
        throw ConfigError("pattern for " + name + " must be a pair");
      }
      bool found = false;
      for (TaskType& t : p.task_types) {
        if (t.name == name) {
          t.pattern = {pat[0].get<int>(), pat[1].get<int>()};
          found = true;
          break;
        }
      }
      if (!found) {
        throw ConfigError("pattern_map names unknown task type: " + name);
      }
    }
  }
  p.validate();
  return p;
}

}  // namespace

TrustParams TrustParams::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("trust params: ") + e.what());
  }
  return params_from_json(j);
}

TrustParams TrustParams::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trust params file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string TrustParams::to_json_text() const {
  json j;
  j["c_g"] = c_g;
  j["c_w"] = c_w;
  j["alpha"] = alpha;
  j["beta"] = beta;
  j["sigma_bar"] = sigma_bar;
  j["ewma_weight"] = ewma_weight;
  j["task_types"] = json::array();
  j["pattern_map"] = json::object();
  for (const TaskType& t : task_types) {
    j["task_types"].push_back(t.name);
    j["pattern_map"][t.name] = {t.pattern[0], t.pattern[1]};
  }
  return j.dump(2);
}

//
// contact history
//

void ContactHistory::record_rating(const std::string& peer, int rating) {
  if (rating != 1 && rating != -1) {
    throw DomainError("record_rating: rating must be +1 or -1");
  }
  auto [it, fresh] = tallies_.try_emplace(peer);
  if (fresh) order_.push_back(peer);
  it->second.total += 1;
  if (rating > 0) it->second.positive += 1;
}

void ContactHistory::record_transaction(const std::string& peer) {
  sigma_[peer] += 1;
}

bool ContactHistory::rated(const std::string& peer) const {
  return tallies_.contains(peer);
}

double ContactHistory::positive_fraction(const std::string& peer) const {
  auto it = tallies_.find(peer);
  if (it == tallies_.end()) {
    throw EmptyHistory("positive_fraction: never rated " + peer);
  }
  return static_cast<double>(it->second.positive) / it->second.total;
}

std::vector<double> ContactHistory::theta() const {
  std::vector<double> out;
  out.reserve(order_.size());
  for (const std::string& peer : order_) {
    out.push_back(positive_fraction(peer));
  }
  return out;
}

std::uint64_t ContactHistory::transactions_with(const std::string& peer) const {
  auto it = sigma_.find(peer);
  return it == sigma_.end() ? 0 : it->second;
}

void ContactHistory::reset() {
  order_.clear();
  tallies_.clear();
  sigma_.clear();
}

void BehaviorEwma::update(double q, double c, double weight) {
  if (!initialized) {
    q_bar = q;
    c_bar = c;
    initialized = true;
    return;
  }
  q_bar = weight * q + (1.0 - weight) * q_bar;
  c_bar = weight * c + (1.0 - weight) * c_bar;
}

//
// sigmoid trust mapping
//

double gompertz(double x, double c_g) {
  return std::exp(-std::exp(-c_g * x));
}

double gompertz_inv(double t, double c_g) {
  if (!(t > 0.0) || !(t < 1.0)) {
    throw DomainError("gompertz_inv: t must be inside (0,1)");
  }
  return -std::log(-std::log(t)) / c_g;
}

double gompertz_third_derivative(double x, double c_g, double step) {
  if (!(step > 0.0)) throw DomainError("gompertz_third_derivative: bad step");
  const long double c = c_g;
  const long double h = step;
  const long double x0 = x;
  auto g = [c](long double v) { return expl(-expl(-c * v)); };
  long double num =
      g(x0 + 2 * h) - 2 * g(x0 + h) + 2 * g(x0 - h) - g(x0 - 2 * h);
  return static_cast<double>(num / (2 * h * h * h));
}

TrustVector update_trust(const TrustVector& prev,
                         const std::vector<double>& delta, double c_g) {
  if (prev.size() != delta.size()) {
    throw DomainError("update_trust: dimension mismatch");
  }
  TrustVector next(prev.size());
  for (std::size_t i = 0; i < prev.size(); ++i) {
    double t = prev[i];
    if (!(t >= 0.0) || !(t <= 1.0)) {
      throw DomainError("update_trust: trust entry outside [0,1]");
    }
    if (delta[i] == 0.0) {
      // An untouched entry must stay bit-identical, not pick up the rounding
      // of a sigmoid round trip.
      next[i] = t;
      continue;
    }
    t = std::clamp(t, kTrustClamp, 1.0 - kTrustClamp);
    next[i] = gompertz(gompertz_inv(t, c_g) + delta[i], c_g);
  }
  return next;
}

TrustVector initial_trust(std::size_t dim) {
  return TrustVector(dim, std::exp(-1.0));
}

//
// credibility
//

double similarity(const ContactHistory& a, const ContactHistory& b) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const std::string& x : a.encounter_order()) {
    if (!b.rated(x)) continue;
    double diff = a.positive_fraction(x) - b.positive_fraction(x);
    sum += diff * diff;
    ++count;
  }
  if (count == 0) {
    throw EmptyIntersection("similarity: no common rated peers");
  }
  return 1.0 - std::sqrt(sum / static_cast<double>(count));
}

double rating_dispersion(const std::vector<double>& theta) {
  if (theta.empty()) throw EmptyHistory("rating_dispersion: empty vector");
  const std::size_t n = theta.size();
  double sum = 0.0;
  for (std::size_t y = 0; y < n; ++y) {
    double diff = theta[y] - theta[(y + 1) % n];
    sum += diff * diff;
  }
  return std::sqrt(sum / static_cast<double>(n));
}

double diversity(const ContactHistory& a, const ContactHistory& b) {
  if (a.empty() || b.empty()) {
    throw EmptyHistory("diversity: a device has rated nobody");
  }
  return 1.0 - std::abs(rating_dispersion(a.theta()) -
                        rating_dispersion(b.theta()));
}

std::uint64_t damping_cutoff(double sigma_bar, double c_w) {
  if (!(sigma_bar > 0.0) || !(c_w > 0.0)) {
    throw DomainError("damping_cutoff: parameters must be positive");
  }
  return static_cast<std::uint64_t>(std::floor(std::sqrt(1.0 / c_w) * sigma_bar));
}

double damping(std::uint64_t sigma_ab, double sigma_bar, double c_w) {
  if (sigma_ab == 0) return 1.0;
  if (sigma_ab > damping_cutoff(sigma_bar, c_w)) return 0.0;
  double ratio = static_cast<double>(sigma_ab) / sigma_bar;
  return -c_w * ratio * ratio + 1.0;
}

bool freshly_encountered(const ContactHistory& a, const ContactHistory& b) {
  if (a.empty() || b.empty()) return true;
  for (const std::string& x : a.encounter_order()) {
    if (b.rated(x)) return false;
  }
  return true;
}

double credibility(const ContactHistory& a, const ContactHistory& b,
                   std::uint64_t sigma_ab, const TrustParams& params) {
  double w = damping(sigma_ab, params.sigma_bar, params.c_w);
  if (freshly_encountered(a, b)) return w;
  double s = similarity(a, b);
  double d = diversity(a, b);
  return (params.alpha * s * s + (1.0 - params.alpha) * d * d) * w;
}

double effective_beta(const ContactHistory& a, const ContactHistory& b,
                      double beta) {
  return freshly_encountered(a, b) ? 1.0 : beta;
}

//
// rating and behavior estimation
//

int rate(double q, double c, const BehaviorEwma& baseline, double beta) {
  if (q < 0.0 || q > 1.0) throw DomainError("rate: QoS outside [0,1]");
  if (c < 0.0 || c > 1.0) throw DomainError("rate: credibility outside [0,1]");
  if (beta < 0.0 || beta > 1.0) throw DomainError("rate: beta outside [0,1]");
  double current = beta * q * q + (1.0 - beta) * c * c;
  double history =
      beta * baseline.q_bar * baseline.q_bar +
      (1.0 - beta) * baseline.c_bar * baseline.c_bar;
  return current >= history ? 1 : -1;
}

std::vector<double> behavior_estimate(double q, double c, int rating,
                                      const TransactionTypeVector& lambda,
                                      const TrustParams& params, Role role) {
  if (q < 0.0 || q > 1.0) {
    throw DomainError("behavior_estimate: QoS outside [0,1]");
  }
  if (c < 0.0 || c > 1.0) {
    throw DomainError("behavior_estimate: credibility outside [0,1]");
  }
  if (rating != 1 && rating != -1) {
    throw DomainError("behavior_estimate: rating must be +1 or -1");
  }
  if (lambda.task_index >= params.dim()) {
    throw UnknownTaskType("behavior_estimate: task index " +
                          std::to_string(lambda.task_index) + " out of range");
  }
  if (!(lambda.value > 0.0) || lambda.value > 1.0) {
    throw DomainError("behavior_estimate: lambda value outside (0,1]");
  }
  const TaskType& task = params.task_types[lambda.task_index];
  int gate = role == Role::Requester ? task.pattern[0] : task.pattern[1];
  std::vector<double> out(params.dim(), 0.0);
  out[lambda.task_index] = q * c * rating * gate * lambda.value;
  return out;
}

void JosangState::record(int rating) {
  if (rating != 1 && rating != -1) {
    throw DomainError("JosangState::record: rating must be +1 or -1");
  }
  if (rating > 0) {
    ++positive;
  } else {
    ++negative;
  }
}

double JosangState::value() const {
  return (static_cast<double>(positive) + 1.0) /
         (static_cast<double>(positive) + static_cast<double>(negative) + 2.0);
}

//
// parameter solvers
//

double solve_cg(double sigma_bar, double positive_prob, double avg_delta) {
  double x_star = sigma_bar * positive_prob * avg_delta;
  if (!(x_star > 0.0)) {
    throw NoPositiveRoot("solve_cg: expected accumulation must be positive");
  }
  // With u = e^{-c x}, the third derivative is c^3 u e^{-u} (u^2 - 3u + 1),
  // whose positive root is u* = (3 - sqrt(5)) / 2. Solving e^{-c x*} = u*
  // for c places the flattening point of the trust climb at x*.
  static const double k = std::log(2.0 / (3.0 - std::sqrt(5.0)));
  return k / x_star;
}

double solve_cw() {
  // d/dx [-c_w x^2] = -2 c_w x matches the reference slope -x at every x
  // exactly when c_w = 1/2.
  return 0.5;
}

}  // namespace tdp::trust
