#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dac/model.hpp"

namespace dac {

/// Contract reward for answering a complaint: when n members respond on the
/// contract, they share per_count[n - 1] out of the budget `total`.
struct RewardSchedule {
  Coin total = 0.0;
  std::vector<Coin> per_count;

  // T_n = T for every n: the whole budget is always paid out.
  static RewardSchedule constant(std::int64_t n_members, Coin total);

  // Throws std::invalid_argument unless 0 <= T_n <= T and there is one entry per member.
  void require_valid(std::int64_t n_members) const;
};

/// Thrown when the reward budget is large enough to deter the attack.
class NoEquilibrium : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct PayoffVectors {
  std::vector<double> q_vec;  // Binomial(N - 1, q) pmf
  std::vector<double> t_vec;  // T_{i+1} / (i + 1), plus p_s when nobody else responds
};

PayoffVectors payoff_vectors(std::int64_t n_members, Coin stake, const RewardSchedule& schedule, double q);

/// <q_vec(q), t_vec>: expected reward-plus-avoided-slash of responding on the contract.
double respond_value(std::int64_t n_members, Coin stake, const RewardSchedule& schedule, double q);

struct RewardEquilibrium {
  std::string variant;              // "lemma3" or "lemma4"
  double q_contract = 0.0;
  std::optional<double> q_network;  // bribed variant only
  double q_fail = 0.0;
  std::optional<Coin> bribe_cost_per_node;
  Coin adversary_spend = 0.0;
  double residual = 0.0;
  // Bribed variant: (p_b(1-q_c) / (p_b + (1-q_c)^(N-1) p_s))^(N/(N-1)). It agrees
  // with q_fail only for N = 2.
  std::optional<double> q_fail_closed_form;

  nlohmann::ordered_json to_json() const;
};

/// Members respond on the contract with probability q_contract; without a
/// bribe the adversary only has to cover the members' expected loss.
/// Throws NoEquilibrium when T >= N p_w or no root lies in (0, 1).
RewardEquilibrium solve_reward_equilibrium(std::int64_t n_members, Coin clue_cost, Coin stake,
                                           const RewardSchedule& schedule);

/// Bribed variant: every member is offered p_b to stay silent over the
/// network and on the contract.
RewardEquilibrium solve_reward_equilibrium_bribed(std::int64_t n_members, Coin clue_cost, Coin stake, Coin bribe,
                                                  const RewardSchedule& schedule);

}  // namespace dac
