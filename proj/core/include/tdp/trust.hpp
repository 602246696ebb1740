#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tdp::trust {

// Per-task trustvalue vector. Entry n is the trustworthiness for task type
// n, always within [0, 1].
using TrustVector = std::vector<double>;

// Trustvalues of exactly 0 or 1 are clamped away by this margin before the
// sigmoid inverse, which would otherwise hit infinity.
inline constexpr double kTrustClamp = 1e-9;

struct TaskType {
  std::string name;
  // Which side of a transaction earns an adjustment: [0] gates the
  // requester, [1] gates the worker. Entries are 0 or 1.
  std::array<int, 2> pattern{1, 1};
};

struct TrustParams {
  double c_g = 0.5;        // trust accumulation sensitivity
  double c_w = 0.5;        // credibility damping sensitivity
  double alpha = 0.5;      // similarity vs diversity weight
  double beta = 0.1;       // QoS vs credibility weight in ratings
  double sigma_bar = 30.0; // average per-cycle transaction count
  double ewma_weight = 0.125;  // weight of the newest observation
  std::vector<TaskType> task_types{TaskType{"default", {1, 1}}};

  std::size_t dim() const { return task_types.size(); }
  std::size_t task_index(const std::string& name) const;  // UnknownTaskType

  // Throws ConfigError when any field is out of range.
  void validate() const;

  static TrustParams from_json_text(const std::string& text);
  static TrustParams from_json_file(const std::string& path);
  std::string to_json_text() const;
};

// One-hot transaction type: entry `task_index` holds `value` (resources
// contributed, in (0, 1]), all other entries are zero.
struct TransactionTypeVector {
  std::size_t task_index = 0;
  double value = 1.0;
};

enum class Role { Requester, Worker };

// Rated-contact record one device keeps during a trust cycle: who it rated,
// the positive-rating fraction per peer in first-encounter order, and the
// pairwise transaction counts.
class ContactHistory {
 public:
  // rating must be +1 or -1
  void record_rating(const std::string& peer, int rating);
  void record_transaction(const std::string& peer);

  bool empty() const { return order_.empty(); }
  const std::vector<std::string>& encounter_order() const { return order_; }
  bool rated(const std::string& peer) const;
  // Fraction of positive ratings this device gave `peer`. Throws
  // EmptyHistory when the peer was never rated.
  double positive_fraction(const std::string& peer) const;
  std::vector<double> theta() const;  // fractions in encounter order
  std::uint64_t transactions_with(const std::string& peer) const;

  void reset();

 private:
  struct Tally {
    std::uint32_t positive = 0;
    std::uint32_t total = 0;
  };
  std::vector<std::string> order_;
  std::map<std::string, Tally> tallies_;
  std::map<std::string, std::uint64_t> sigma_;
};

// EWMA of the QoS and credibility a device has seen, used as the baseline
// for rating decisions. The first observation initializes both averages.
struct BehaviorEwma {
  double q_bar = 0.0;
  double c_bar = 0.0;
  bool initialized = false;

  void update(double q, double c, double weight);
};

//
// sigmoid trust mapping
//

double gompertz(double x, double c_g);
// Throws DomainError unless t lies strictly inside (0, 1).
double gompertz_inv(double t, double c_g);
// Third derivative by long-double central differences. The 80-bit stencil
// keeps the residual at the solver's root below 1e-6, which plain doubles
// cannot do at this step size.
double gompertz_third_derivative(double x, double c_g, double step = 1e-4);

// Applies one adjustment: G(G^{-1}(t) + delta) entrywise. Entries of prev
// outside [0, 1] throw DomainError; 0 and 1 themselves are clamped by
// kTrustClamp.
TrustVector update_trust(const TrustVector& prev,
                         const std::vector<double>& delta, double c_g);

TrustVector initial_trust(std::size_t dim);  // every entry g(0) = 1/e

//
// credibility
//

// 1 - sqrt(mean squared difference of positive fractions over the common
// rated peers). Throws EmptyIntersection when no peer was rated by both.
double similarity(const ContactHistory& a, const ContactHistory& b);

// Root mean square of cyclically adjacent differences in theta; 0 for a
// single entry. Throws EmptyHistory for an empty vector.
double rating_dispersion(const std::vector<double>& theta);

// 1 - |dispersion(a) - dispersion(b)|. Throws EmptyHistory when either
// device has rated nobody yet.
double diversity(const ContactHistory& a, const ContactHistory& b);

// Quadratic intimacy damping: 1 at sigma = 0, decreasing, exactly 0 once
// sigma exceeds damping_cutoff().
double damping(std::uint64_t sigma_ab, double sigma_bar, double c_w);
std::uint64_t damping_cutoff(double sigma_bar, double c_w);

// True when either history is empty or their rated-peer sets do not
// intersect; the pair is then treated as freshly encountered.
bool freshly_encountered(const ContactHistory& a, const ContactHistory& b);

// (alpha s^2 + (1-alpha) d^2) w. Freshly encountered pairs skip the
// comparability terms and get the bare damping factor, so new devices are
// not starved.
double credibility(const ContactHistory& a, const ContactHistory& b,
                   std::uint64_t sigma_ab, const TrustParams& params);

// beta for the rating decision: 1 for freshly encountered pairs (QoS only),
// the configured value otherwise.
double effective_beta(const ContactHistory& a, const ContactHistory& b,
                      double beta);

//
// rating and behavior estimation
//

// +1 when beta q^2 + (1-beta) c^2 reaches the same blend of the EWMAs,
// else -1. Ties rate positive. An uninitialized EWMA baseline is zero, so a
// device's first transaction always rates positive.
int rate(double q, double c, const BehaviorEwma& baseline, double beta);

// q * c * rating at the task entry, gated by the task's adjustment pattern
// and the device's role; all other entries zero.
std::vector<double> behavior_estimate(double q, double c, int rating,
                                      const TransactionTypeVector& lambda,
                                      const TrustParams& params, Role role);

// Beta-reputation baseline used for comparison runs: (p+1)/(p+n+2).
struct JosangState {
  std::uint64_t positive = 0;
  std::uint64_t negative = 0;

  void record(int rating);
  double value() const;
};

//
// parameter solvers
//

// c_g such that the third derivative of the sigmoid vanishes at the
// expected behavior accumulation x* = sigma_bar * positive_prob *
// avg_delta: the trust climb flattens right when a device completes an
// average cycle's worth of transactions. Throws NoPositiveRoot when x* is
// not positive.
double solve_cg(double sigma_bar, double positive_prob = 0.5,
                double avg_delta = 0.125);

// c_w such that the damping rate at sigma = sigma_bar equals the slope of
// the identity, d/dx [-c_w x^2] = -1 at x = 1.
double solve_cw();

}  // namespace tdp::trust
