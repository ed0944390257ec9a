#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dac/reward.hpp"

using namespace dac;

namespace {

// Expected value of responding on the contract, summed term by term.
double naive_respond(int n, double ps, double t, double q) {
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double c = 1.0;
    for (int j = 1; j <= i; ++j) c = c * (n - 1 - i + j) / j;
    const double pmf = c * std::pow(q, i) * std::pow(1.0 - q, n - 1 - i);
    total += pmf * (t / (i + 1) + (i == 0 ? ps : 0.0));
  }
  return total;
}

// First sign change of naive_respond - target on a uniform grid.
double scan_root(int n, double ps, double t, double target, double step) {
  double prev = naive_respond(n, ps, t, 0.0) - target;
  for (double q = step; q <= 1.0; q += step) {
    const double cur = naive_respond(n, ps, t, q) - target;
    if ((prev > 0) != (cur > 0)) return q - step / 2;
    prev = cur;
  }
  return -1.0;
}

}  // namespace

TEST_CASE("payoff vectors") {
  const auto s = RewardSchedule::constant(2, 1.5);
  const auto v = payoff_vectors(2, 1.0, s, 0.5);
  CHECK(v.q_vec == std::vector<double>{0.5, 0.5});
  CHECK(v.t_vec[0] == doctest::Approx(2.5));
  CHECK(v.t_vec[1] == doctest::Approx(0.75));

  const auto s6 = RewardSchedule::constant(6, 0.4);
  for (double q : {0.0, 0.13, 0.5, 0.99, 1.0}) {
    const auto w = payoff_vectors(6, 1.0, s6, q);
    CHECK(std::accumulate(w.q_vec.begin(), w.q_vec.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(respond_value(6, 1.0, s6, q) == doctest::Approx(naive_respond(6, 1.0, 0.4, q)).epsilon(1e-12));
  }
  const auto z = payoff_vectors(4, 1.0, RewardSchedule::constant(4, 0.1), 0.0);
  CHECK(z.q_vec == std::vector<double>{1, 0, 0, 0});
  CHECK_THROWS_AS(payoff_vectors(1, 1.0, RewardSchedule::constant(1, 0.1), 0.5), std::invalid_argument);
}

TEST_CASE("schedule validation") {
  RewardSchedule s{1.0, {1.0, 0.5, 1.2}};
  CHECK_THROWS_AS(s.require_valid(3), std::invalid_argument);
  s.per_count = {1.0, 0.5};
  CHECK_THROWS_AS(s.require_valid(3), std::invalid_argument);
  s.per_count = {1.0, -0.1, 0.0};
  CHECK_THROWS_AS(s.require_valid(3), std::invalid_argument);
  s.per_count = {1.0, 0.5, 0.0};
  CHECK_NOTHROW(s.require_valid(3));
}

TEST_CASE("hand-solvable linear case") {
  // 1 = (1 - q)(1.5 + 0.5) + q 0.75 gives q = 0.8.
  const auto eq = solve_reward_equilibrium(2, 1.0, 0.5, RewardSchedule::constant(2, 1.5));
  CHECK(eq.variant == "lemma3");
  CHECK(eq.q_contract == doctest::Approx(0.8).epsilon(1e-10));
  CHECK(eq.q_fail == doctest::Approx(0.04).epsilon(1e-9));
  CHECK(*eq.bribe_cost_per_node == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(eq.adversary_spend == doctest::Approx(1.8).epsilon(1e-9));
  CHECK(std::abs(eq.residual) < 1e-10);
  CHECK(std::abs(scan_root(2, 0.5, 1.5, 1.0, 1e-6) - eq.q_contract) < 1e-6);
  CHECK_FALSE(eq.q_network.has_value());
  CHECK(eq.to_json().dump() ==
        nlohmann::ordered_json{{"variant", "lemma3"},
                               {"q_contract", eq.q_contract},
                               {"q_fail", eq.q_fail},
                               {"bribe_cost_per_node", *eq.bribe_cost_per_node},
                               {"adversary_spend", eq.adversary_spend}}
            .dump());
}

TEST_CASE("equilibrium properties over a grid") {
  for (int n : {2, 3, 5, 8}) {
    for (double frac : {0.1, 0.4, 0.9}) {
      const double pw = 0.1;
      const double ps = 1.0;
      const double t = frac * n * pw;
      const auto eq = solve_reward_equilibrium(n, pw, ps, RewardSchedule::constant(n, t));
      CHECK(eq.q_contract > 0.0);
      CHECK(eq.q_contract < 1.0);
      CHECK(eq.q_fail > 0.0);
      CHECK(eq.q_fail < 1.0);
      CHECK(std::abs(eq.residual) < 1e-10);
      CHECK(eq.adversary_spend < n * pw);
      CHECK(std::abs(scan_root(n, ps, t, pw, 1e-5) - eq.q_contract) < 1e-5);
    }
  }
}

TEST_CASE("large rewards deter the attack") {
  CHECK_THROWS_AS(solve_reward_equilibrium(3, 0.25, 1.0, RewardSchedule::constant(3, 0.75)), NoEquilibrium);
  CHECK_THROWS_AS(solve_reward_equilibrium(3, 0.1, 1.0, RewardSchedule::constant(3, 5.0)), NoEquilibrium);
  CHECK_THROWS_AS(solve_reward_equilibrium_bribed(3, 0.1, 1.0, 0.3, RewardSchedule::constant(3, 1.25)),
                  NoEquilibrium);
  // Between N p_w and N (p_w + p_b) only the bribed variant has an equilibrium.
  CHECK_NOTHROW(solve_reward_equilibrium_bribed(3, 0.1, 1.0, 0.3, RewardSchedule::constant(3, 0.5)));
}

TEST_CASE("error paths") {
  const auto s = RewardSchedule::constant(3, 0.1);
  CHECK_THROWS_AS(solve_reward_equilibrium(1, 0.1, 1.0, RewardSchedule::constant(1, 0.05)), std::invalid_argument);
  CHECK_THROWS_AS(solve_reward_equilibrium(3, 0.0, 1.0, s), std::invalid_argument);
  CHECK_THROWS_AS(solve_reward_equilibrium(3, 0.1, 1.0, RewardSchedule{0.1, {0.1}}), std::invalid_argument);
  CHECK_THROWS_AS(solve_reward_equilibrium_bribed(3, 1.0, 1.0, 0.0, s), std::invalid_argument);
  CHECK_THROWS_AS(solve_reward_equilibrium_bribed(3, 0.1, 1.0, 0.95, s), std::invalid_argument);
  CHECK_THROWS_AS(solve_reward_equilibrium_bribed(3, 0.1, 1.0, -0.1, s), std::invalid_argument);
}

TEST_CASE("bribed fixture") {
  const auto eq = solve_reward_equilibrium_bribed(3, 0.1, 1.0, 0.3, RewardSchedule::constant(3, 0.5));
  CHECK(eq.variant == "lemma4");
  CHECK(std::abs(eq.residual) < 1e-10);
  CHECK(std::abs(scan_root(3, 1.0, 0.5, 0.4, 1e-6) - eq.q_contract) < 1e-6);
  const double qc = eq.q_contract;
  const double d = 0.3 + (1 - qc) * (1 - qc) * 1.0;
  const double qr = 1.0 - std::sqrt(0.3 / d);
  CHECK(*eq.q_network == doctest::Approx(qr).epsilon(1e-12));
  CHECK(eq.q_fail == doctest::Approx(std::pow((1 - qr) * (1 - qc), 3)).epsilon(1e-12));
  CHECK(*eq.q_fail_closed_form == doctest::Approx(std::pow(0.3 * (1 - qc) / d, 1.5)).epsilon(1e-12));
  CHECK(eq.adversary_spend == doctest::Approx(3 * 0.09 * (1 - qc) / d).epsilon(1e-12));
  CHECK(qc == doctest::Approx(0.6185466433).epsilon(1e-8));
  CHECK(eq.q_fail == doctest::Approx(0.0306708).epsilon(1e-5));
}

TEST_CASE("bribed closed forms agree for two members") {
  for (double pb : {0.05, 0.2, 0.5}) {
    const auto eq = solve_reward_equilibrium_bribed(2, 0.1, 1.0, pb, RewardSchedule::constant(2, 0.15));
    CHECK(eq.q_fail == doctest::Approx(*eq.q_fail_closed_form).epsilon(1e-12));
  }
}

TEST_CASE("vanishing bribe") {
  double prev_fail = 1.0;
  for (double pb : {1e-2, 1e-4, 1e-6, 1e-9}) {
    const auto eq = solve_reward_equilibrium_bribed(4, 0.1, 1.0, pb, RewardSchedule::constant(4, 0.2));
    CHECK(eq.q_fail <= prev_fail);
    prev_fail = eq.q_fail;
  }
  const auto tiny = solve_reward_equilibrium_bribed(4, 0.1, 1.0, 1e-12, RewardSchedule::constant(4, 0.2));
  CHECK(*tiny.q_network > 0.99);
  CHECK(tiny.q_fail < 1e-9);
}
