#include "dac/reward.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "dac/numeric.hpp"

namespace dac {
namespace {

constexpr int kScanPoints = 1000;

void require_members(std::int64_t n) {
  if (n < 2) throw std::invalid_argument("reward analysis needs at least 2 members");
}

// Smallest root of f in (0, 1): coarse scan, then bisection on the first bracket.
std::optional<double> smallest_root(const std::function<double(double)>& f) {
  double prev_q = 0.0;
  double prev = f(0.0);
  for (int i = 1; i <= kScanPoints; ++i) {
    const double q = static_cast<double>(i) / kScanPoints;
    const double cur = f(q);
    if (cur == 0.0 && i < kScanPoints) return q;
    if (prev != 0.0 && (prev < 0.0) != (cur < 0.0)) {
      const double root = bisect(f, prev_q, q);
      if (root > 0.0 && root < 1.0) return root;
    }
    prev_q = q;
    prev = cur;
  }
  return std::nullopt;
}

}  // namespace

RewardSchedule RewardSchedule::constant(std::int64_t n_members, Coin total) {
  if (n_members < 1) throw std::invalid_argument("schedule needs at least one member");
  return {total, std::vector<Coin>(static_cast<std::size_t>(n_members), total)};
}

void RewardSchedule::require_valid(std::int64_t n_members) const {
  if (static_cast<std::int64_t>(per_count.size()) != n_members) {
    throw std::invalid_argument("reward schedule needs one entry T_n per member count");
  }
  if (!(total >= 0.0)) throw std::invalid_argument("reward budget T must be non-negative");
  for (Coin t : per_count) {
    if (!(t >= 0.0 && t <= total)) throw std::invalid_argument("every T_n must lie in [0, T]");
  }
}

PayoffVectors payoff_vectors(std::int64_t n, Coin stake, const RewardSchedule& schedule, double q) {
  require_members(n);
  schedule.require_valid(n);
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("q must be a probability");
  PayoffVectors v;
  v.q_vec.resize(static_cast<std::size_t>(n));
  v.t_vec.resize(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    v.q_vec[idx] = binomial_pmf(n - 1, i, q);
    v.t_vec[idx] = schedule.per_count[idx] / static_cast<double>(i + 1) + (i == 0 ? stake : 0.0);
  }
  return v;
}

double respond_value(std::int64_t n, Coin stake, const RewardSchedule& schedule, double q) {
  const PayoffVectors v = payoff_vectors(n, stake, schedule, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < v.q_vec.size(); ++i) sum += v.q_vec[i] * v.t_vec[i];
  return sum;
}

nlohmann::ordered_json RewardEquilibrium::to_json() const {
  nlohmann::ordered_json j;
  j["variant"] = variant;
  j["q_contract"] = q_contract;
  if (q_network) j["q_network"] = *q_network;
  j["q_fail"] = q_fail;
  if (q_fail_closed_form) j["q_fail_closed_form"] = *q_fail_closed_form;
  if (bribe_cost_per_node) j["bribe_cost_per_node"] = *bribe_cost_per_node;
  j["adversary_spend"] = adversary_spend;
  return j;
}

RewardEquilibrium solve_reward_equilibrium(std::int64_t n, Coin clue_cost, Coin stake,
                                           const RewardSchedule& schedule) {
  require_members(n);
  schedule.require_valid(n);
  if (!(clue_cost > 0.0)) throw std::invalid_argument("p_w must be positive");
  if (!(stake >= 0.0)) throw std::invalid_argument("p_s must be non-negative");
  if (schedule.total >= static_cast<double>(n) * clue_cost) {
    throw NoEquilibrium("T >= N p_w: members always respond on the contract");
  }
  const auto gap = [&](double q) { return respond_value(n, stake, schedule, q) - clue_cost; };
  const auto root = smallest_root(gap);
  if (!root) throw NoEquilibrium("no mixing probability in (0, 1) equalizes the payoffs");

  const double q = *root;
  const double n_d = static_cast<double>(n);
  RewardEquilibrium eq;
  eq.variant = "lemma3";
  eq.q_contract = q;
  eq.q_fail = std::pow(1.0 - q, n_d);
  eq.bribe_cost_per_node = clue_cost - std::pow(1.0 - q, n_d - 1.0) * stake;
  eq.adversary_spend = n_d * *eq.bribe_cost_per_node;
  eq.residual = gap(q);
  return eq;
}

RewardEquilibrium solve_reward_equilibrium_bribed(std::int64_t n, Coin clue_cost, Coin stake, Coin bribe,
                                                  const RewardSchedule& schedule) {
  require_members(n);
  schedule.require_valid(n);
  if (!(clue_cost >= 0.0)) throw std::invalid_argument("p_w must be non-negative");
  if (!(clue_cost < stake)) throw std::invalid_argument("p_w must be below p_s");
  if (!(bribe >= 0.0)) throw std::invalid_argument("p_b must be non-negative");
  if (bribe > stake - clue_cost) throw std::invalid_argument("p_b must not exceed p_s - p_w");
  if (schedule.total >= static_cast<double>(n) * (clue_cost + bribe)) {
    throw NoEquilibrium("T >= N (p_w + p_b): members always respond on the contract");
  }
  const auto gap = [&](double q) { return respond_value(n, stake, schedule, q) - (clue_cost + bribe); };
  const auto root = smallest_root(gap);
  if (!root) throw NoEquilibrium("no mixing probability in (0, 1) equalizes the payoffs");

  const double qc = *root;
  const double n_d = static_cast<double>(n);
  const double silent_others = std::pow(1.0 - qc, n_d - 1.0);
  const double denom = bribe + silent_others * stake;

  RewardEquilibrium eq;
  eq.variant = "lemma4";
  eq.q_contract = qc;
  eq.q_network = 1.0 - std::pow(bribe / denom, 1.0 / (n_d - 1.0));
  eq.q_fail = std::pow((1.0 - *eq.q_network) * (1.0 - qc), n_d);
  eq.q_fail_closed_form = std::pow(bribe * (1.0 - qc) / denom, n_d / (n_d - 1.0));
  eq.adversary_spend = n_d * bribe * bribe * (1.0 - qc) / denom;
  eq.residual = gap(qc);
  return eq;
}

}  // namespace dac
