#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "brute_force_oracle.hpp"
#include "dac/equilibrium.hpp"
#include "dac/numeric.hpp"
#include "dac/rng.hpp"

using namespace dac;

namespace {

ProtocolParams small(std::int64_t n, std::int64_t f, std::int64_t k) {
  ProtocolParams p;
  p.n_nodes = n;
  p.n_byzantine = f;
  p.threshold_k = k;
  p.stake = 2.0;
  p.clue_cost = 0.1;
  p.query_cost = 0.05;
  p.client_value = 10.0;
  p.compensation = 1.0;
  p.epsilon_slash = 0.01;
  return p;
}

}  // namespace

TEST_CASE("withholding ratio") {
  CHECK(withholding_ratio(0.5, 2.0, 0.1, 0.0) == 0.0);
  CHECK(withholding_ratio(0.5, 2.0, 0.1, -1.0) == 0.0);
  CHECK(withholding_ratio(1.0, 2.0, 0.1, 0.95) == doctest::Approx(0.5).epsilon(1e-15));
  for (double nu : {0.1, 0.3, 0.5, 0.8, 1.0}) {
    CHECK(withholding_ratio(nu, 2.0, 0.1, 1.9) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(withholding_ratio(nu, 2.0, 0.1, 0.7) == doctest::Approx(oracle::ratio(nu, 2.0, 0.1, 0.7)).epsilon(1e-12));
    double prev = 0.0;
    for (int i = 1; i <= 100; ++i) {
      const double g = withholding_ratio(nu, 2.0, 0.1, 1.9 * i / 100.0);
      CHECK(g >= prev);
      prev = g;
    }
  }
  // Risk aversion raises the price of withholding.
  CHECK(withholding_ratio(0.5, 32.0, 0.0226, 1.0) < withholding_ratio(1.0, 32.0, 0.0226, 1.0));
}

TEST_CASE("bounds collapse to the closed form at nu = 1") {
  const BribeModel m{5, 2.0, 0.1};
  for (double p0 : {0.0, 0.3, 2.0, 9.0}) {
    const double exact = p0 / (5 * 1.9);
    CHECK(failure_lower_bound(m, p0, 1.0) == doctest::Approx(exact).epsilon(1e-12));
    CHECK(failure_upper_bound(m, p0, 1.0) == doctest::Approx(exact).epsilon(1e-12));
  }
  const auto q = q_star_risk_neutral(small(7, 2, 1), 0.2);
  CHECK(q.value == doctest::Approx(0.2 / 9.5));
  CHECK(q.provenance == Provenance::ExactClosedForm);
  CHECK(q_star_risk_neutral(small(7, 2, 1), 100.0).value == 1.0);
  CHECK_THROWS_AS(q_star_risk_neutral(small(7, 2, 1), -1.0), std::invalid_argument);
}

TEST_CASE("lower bound never exceeds upper bound") {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    BribeModel mm{1 + static_cast<std::int64_t>(rng.below(50)), 1.0 + 40.0 * rng.uniform(), 0.0};
    mm.clue_cost = mm.stake * 0.5 * rng.uniform();
    const double nu = 0.05 + 0.95 * rng.uniform();
    const double p0 = mm.threshold() * rng.uniform();
    const double lo = failure_lower_bound(mm, p0, nu);
    const double hi = failure_upper_bound(mm, p0, nu);
    CHECK(lo >= 0.0);
    CHECK(hi <= 1.0 + 1e-12);
    CHECK(lo <= hi + 1e-12);
  }
}

TEST_CASE("bounds are monotone in the bribe") {
  const BribeModel m{4, 2.0, 0.1};
  for (double nu : {0.2, 0.6, 1.0}) {
    double plo = 0.0;
    double phi = 0.0;
    for (int i = 0; i <= 200; ++i) {
      const double p0 = m.threshold() * i / 200.0;
      const double lo = failure_lower_bound(m, p0, nu);
      const double hi = failure_upper_bound(m, p0, nu);
      CHECK(lo >= plo - 1e-15);
      CHECK(hi >= phi - 1e-15);
      plo = lo;
      phi = hi;
    }
  }
}

TEST_CASE("risk-averse bounds and the strong adversary") {
  const auto p = small(7, 2, 3);
  const auto b = q_star_bounds_risk_averse(p, 1.0, 0.5);
  CHECK(b.lower.provenance == Provenance::LowerBound);
  CHECK(b.upper.provenance == Provenance::UpperBound);
  CHECK(b.lower.value <= b.upper.value);
  CHECK_THROWS_AS(q_star_bounds_risk_averse(p, p.strong_adversary_threshold(), 0.5), StrongAdversaryError);
  CHECK_THROWS_AS(q_star_bounds_risk_averse(p, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(q_star_bounds_risk_averse(p, 1.0, 1.5), std::invalid_argument);
}

TEST_CASE("exact solver matches the brute-force oracle on three nodes") {
  const auto p = small(3, 0, 2);  // three honest nodes, groups of two
  REQUIRE(p.committee_size() == 2);
  for (double nu : {0.3, 0.5, 0.8}) {
    for (double p0 : {0.5, 1.5, 3.0}) {
      const auto exact = solve_q_star_exact_small(p, p0, nu);
      const double grid = oracle::best_over_grid(nu, p.stake, p.clue_cost, p0, 200);
      const BribeModel m = BribeModel::from(p);
      CHECK(exact.q.provenance == Provenance::NumericalOptimum);
      CHECK(exact.q.value >= grid - 1e-9);
      CHECK(exact.q.value == doctest::Approx(grid).epsilon(1e-2));
      CHECK(exact.q.value >= failure_lower_bound(m, p0, nu) - 1e-9);
      CHECK(exact.q.value <= failure_upper_bound(m, p0, nu) + 1e-9);
      CHECK(exact.allocation.total() == doctest::Approx(std::min(p0, 3 * 1.9)).epsilon(1e-9));
    }
  }
}

TEST_CASE("exact solver at nu = 1 equals the closed form") {
  for (auto p : {small(3, 0, 2), small(5, 1, 2), small(6, 0, 4)}) {
    const double p0 = 0.4 * p.strong_adversary_threshold();
    const auto exact = solve_q_star_exact_small(p, p0, 1.0);
    CHECK(exact.q.value == doctest::Approx(q_star_risk_neutral(p, p0).value).epsilon(1e-9));
  }
  const auto p = small(3, 0, 2);
  CHECK(solve_q_star_exact_small(p, p.strong_adversary_threshold(), 0.5).q.value == 1.0);
  CHECK(solve_q_star_exact_small(p, 0.0, 0.5).q.value == 0.0);
}

TEST_CASE("exact solver is deterministic and bounded") {
  const auto p = small(6, 1, 2);
  const auto a = solve_q_star_exact_small(p, 2.0, 0.5);
  const auto b = solve_q_star_exact_small(p, 2.0, 0.5);
  CHECK(a.q.value == b.q.value);
  CHECK(a.allocation.per_node == b.allocation.per_node);
  CHECK_THROWS_AS(solve_q_star_exact_small(small(13, 0, 2), 1.0, 0.5), InstanceTooLargeError);
  CHECK_THROWS_AS(solve_q_star_exact_small(small(12, 0, 7), 1.0, 0.5), InstanceTooLargeError);  // C(12,6)
  CHECK_THROWS_AS(solve_q_star_exact_small(p, -1.0, 0.5), std::invalid_argument);
}

TEST_CASE("inner program value") {
  const auto p = small(3, 0, 2);
  BribeAllocation a{{0.95, 0.95, 0.0}};
  // Ratios 0.5, 0.5, 0: one group {0,1} with weight 0.5.
  CHECK(withholding_lp_value(p, 1.0, a) == doctest::Approx(0.5));
  a.per_node = {1.9, 1.9, 1.9};
  CHECK(withholding_lp_value(p, 1.0, a) == doctest::Approx(1.0));
  a.per_node = {1.0};
  CHECK_THROWS_AS(withholding_lp_value(p, 1.0, a), std::invalid_argument);
}

TEST_CASE("minimum bribe inverts the bounds") {
  const auto eth = ethereum_reference_params();
  for (double nu : {0.1, 0.5, 0.8, 1.0}) {
    const auto b = min_bribe_for_failure(eth, nu, 1e-3);
    const auto m = BribeModel::from(eth);
    CHECK_FALSE(b.saturated);
    CHECK(b.p0_min <= b.p0_max + 1e-9);
    CHECK(failure_upper_bound(m, b.p0_min, nu) == doctest::Approx(1e-3).epsilon(1e-9));
    CHECK(failure_lower_bound(m, b.p0_max, nu) == doctest::Approx(1e-3).epsilon(1e-9));
  }
  const auto sat = min_bribe_for_failure(eth, 0.5, 1.0);
  CHECK(sat.saturated);
  CHECK(sat.p0_min == sat.threshold);
  CHECK(sat.p0_max == sat.threshold);
  CHECK_THROWS_AS(min_bribe_for_failure(eth, 0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(min_bribe_for_failure(eth, 0.5, 1.5), std::invalid_argument);
}

TEST_CASE("reference table values") {
  const auto eth = ethereum_reference_params();
  const double table[][3] = {{1.0, 3197.9, 3197.9}, {0.8, 3197.9, 3977.5}, {0.5, 3197.9, 6082.5}, {0.1, 3197.9, 13257.7}};
  for (const auto& row : table) {
    const auto b = min_bribe_for_failure(eth, row[0], 1e-3);
    CHECK(b.p0_min == doctest::Approx(row[1]).epsilon(0.01));
    CHECK(b.p0_max == doctest::Approx(row[2]).epsilon(0.01));
  }
}

TEST_CASE("repeated queries") {
  CHECK(repeated_query_factor(0.1, 1) == doctest::Approx(0.1));
  CHECK(repeated_query_factor(0.5, 5) == doctest::Approx(0.1));
  CHECK(repeated_query_factor(1.0, 4) == 0.25);
  CHECK(repeated_query_factor(0.0, 2) == 0.0);
  CHECK_THROWS_AS(repeated_query_factor(0.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(repeated_query_factor(1.5, 2), std::invalid_argument);
}

TEST_CASE("free rider at the example point") {
  // Five honest nodes, k = 2, B = 0, risk neutral.
  const auto p = small(5, 0, 2);
  const auto eq = solve_free_rider(p, 0.0, UtilitySpec::risk_neutral());
  CHECK(eq.interior);
  CHECK(std::abs(eq.residual) < 1e-10);
  // Pr[Bin(4, r) < 2] * p_s = p_w at indifference.
  CHECK(binomial_cdf_below(4, eq.r_star, 2) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(eq.failure == doctest::Approx(binomial_cdf_below(5, eq.r_star, 2)).epsilon(1e-12));
  CHECK(eq.failure > 0.0);
}

TEST_CASE("free rider closed form at k = 1") {
  for (std::int64_t n : {2, 4, 9}) {
    const auto p = small(n, 0, 1);
    const auto eq = solve_free_rider(p, 0.0, UtilitySpec::risk_neutral());
    const double r = 1.0 - std::pow(p.clue_cost / p.stake, 1.0 / static_cast<double>(n - 1));
    CHECK(eq.r_star == doctest::Approx(r).epsilon(1e-9));
    CHECK(eq.failure == doctest::Approx(std::pow(1.0 - r, static_cast<double>(n))).epsilon(1e-9));
  }
}

TEST_CASE("free rider boundaries and risk aversion") {
  const auto p = small(5, 0, 2);
  const auto none = solve_free_rider(p, p.clue_cost, UtilitySpec::risk_neutral());
  CHECK(none.r_star == 1.0);
  CHECK(none.failure == 0.0);
  CHECK_FALSE(none.interior);

  // k beyond the other honest nodes: withholding is always caught.
  const auto caught = solve_free_rider(small(3, 0, 3), 0.0, UtilitySpec::risk_neutral());
  CHECK(caught.r_star == 1.0);
  CHECK(caught.failure == 0.0);

  const auto ra = solve_free_rider(p, 0.05, UtilitySpec::for_nodes(0.5, p));
  CHECK(ra.interior);
  CHECK(std::abs(ra.residual) < 1e-10);
  CHECK(std::abs(free_rider_indifference_gap(p, 0.05, UtilitySpec::for_nodes(0.5, p), ra.r_star)) < 1e-10);
  CHECK_THROWS_AS(solve_free_rider(p, -0.1, UtilitySpec::risk_neutral()), std::invalid_argument);
}

TEST_CASE("client bribe constraint") {
  const auto p = small(7, 2, 3);
  // Risk neutral: p1 >= p_c - q p_comp.
  CHECK(p1_supports_contract_path(p, 1.0, 0.0, 0.05));
  CHECK_FALSE(p1_supports_contract_path(p, 1.0, 0.0, 0.049));
  CHECK(p1_supports_contract_path(p, 1.0, 0.05, 0.0));
  CHECK(p1_supports_contract_path(p, 1.0, 0.2, 0.0));
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const double q = rng.uniform();
    const double p1 = 0.1 * rng.uniform();
    const bool expected = (1 - q) * (p.client_value - p.query_cost + p1) +
                              q * (p.client_value - p.query_cost + p1 + p.compensation) >=
                          p.client_value - 1e-12;
    const double margin = p1 + q * p.compensation - p.query_cost;
    if (std::abs(margin) > 1e-9) CHECK(p1_supports_contract_path(p, 1.0, q, p1) == expected);
  }
  CHECK(p1_supports_contract_path(p, 0.3, 0.7, p.compensation - p.query_cost));
  // Concave utility makes the client harder to bribe.
  CHECK(p1_supports_contract_path(p, 1.0, 0.04, 0.0101));
  CHECK_FALSE(p1_supports_contract_path(p, 0.5, 0.04, 0.0101));
}

TEST_CASE("regime fixtures") {
  const auto p = small(7, 2, 3);
  const auto neutral = UtilitySpec::risk_neutral();

  CHECK(classify_regime(p, {0.0, 0.0}, neutral).regime == Regime::SecureNoAttack);
  CHECK(classify_regime(p, {0.0, 0.0}, neutral).q.value == 0.0);

  const auto bribed = classify_regime(p, {0.0, 0.96}, neutral);
  CHECK(bribed.regime == Regime::ClientBribedFailure);
  CHECK(bribed.q.value == 1.0);

  const auto strong = classify_regime(p, {p.strong_adversary_threshold(), 0.0}, neutral);
  CHECK(strong.regime == Regime::StrongAdversaryFailure);
  CHECK(strong.q.value == 1.0);

  const auto k1 = small(7, 2, 1);
  const auto quiet = classify_regime(k1, {0.5 * 5 * k1.clue_cost, 0.0}, neutral);
  CHECK(quiet.regime == Regime::SecureWithoutContract);
  CHECK(quiet.q.value == 0.0);

  const auto path = classify_regime(p, {1.14, 0.0}, neutral);
  CHECK(path.regime == Regime::ContractPathFailure);
  CHECK(path.q.value == doctest::Approx(0.2));
  const auto j = path.to_json();
  CHECK(j.begin().key() == "regime");
  CHECK(j["regime"] == "ContractPathFailure");
  CHECK(j["provenance"] == "exact-closed-form");
}

TEST_CASE("regimes partition the parameter space") {
  Rng rng(11);
  for (int i = 0; i < 3000; ++i) {
    const std::int64_t n = 2 + static_cast<std::int64_t>(rng.below(20));
    const std::int64_t f = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n)));
    const std::int64_t k = 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n - f)));
    auto p = small(n, f, k);
    const double nu = rng.uniform() < 0.5 ? 1.0 : 0.1 + 0.9 * rng.uniform();
    const AdversaryParams adv{p.strong_adversary_threshold() * 1.2 * rng.uniform(), 1.2 * rng.uniform()};
    const auto c = classify_regime(p, adv, UtilitySpec{nu, 0.0});
    CHECK(c.q.value >= 0.0);
    CHECK(c.q.value <= 1.0);
    switch (c.regime) {
      case Regime::SecureNoAttack:
        CHECK(c.q.value == 0.0);
        break;
      case Regime::SecureWithoutContract:
        CHECK(k == 1);
        CHECK(c.q.value == 0.0);
        break;
      case Regime::ContractPathFailure:
        CHECK(adv.node_budget < p.strong_adversary_threshold());
        CHECK(c.q.value > 0.0);
        break;
      case Regime::StrongAdversaryFailure:
        CHECK(adv.node_budget >= p.strong_adversary_threshold());
        CHECK(c.q.value == 1.0);
        break;
      case Regime::ClientBribedFailure:
        CHECK(adv.client_bribe > p.compensation - p.query_cost);
        CHECK(c.q.value == 1.0);
        break;
    }
  }
}
