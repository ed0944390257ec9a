#include "dac/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dac/numeric.hpp"
#include "dac/packing_lp.hpp"
#include "dac/rng.hpp"

namespace dac {
namespace {

void require_nu(double nu) {
  if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("nu must lie in (0, 1]");
}

void require_budget(Coin p0) {
  if (!(p0 >= 0.0)) throw std::invalid_argument("p0 must be non-negative");
}

}  // namespace

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::ExactClosedForm: return "exact-closed-form";
    case Provenance::LowerBound: return "lower-bound";
    case Provenance::UpperBound: return "upper-bound";
    case Provenance::NumericalOptimum: return "numerical-optimum";
    case Provenance::MonteCarlo: return "monte-carlo";
  }
  return "unknown";
}

double withholding_ratio(double nu, Coin stake, Coin clue_cost, Coin bribe) {
  if (bribe <= 0.0) return 0.0;
  if (nu == 1.0) return bribe / (stake - clue_cost);
  return pow_difference(stake + bribe, stake, nu) / pow_difference(stake + bribe, clue_cost + bribe, nu);
}

double failure_lower_bound(const BribeModel& m, Coin p0, double nu) {
  return withholding_ratio(nu, m.stake, m.clue_cost, p0 / static_cast<double>(m.committee));
}

double failure_upper_bound(const BribeModel& m, Coin p0, double nu) {
  const double linear = p0 / (m.stake - m.clue_cost);
  const double concentrated = withholding_ratio(nu, m.stake, m.clue_cost, p0);
  return std::min(linear, concentrated) / static_cast<double>(m.committee);
}

FailureProbability q_star_risk_neutral(const ProtocolParams& params, Coin p0) {
  require_budget(p0);
  const Coin threshold = params.strong_adversary_threshold();
  if (p0 >= threshold) return {1.0, Provenance::ExactClosedForm};
  return {std::min(1.0, p0 / threshold), Provenance::ExactClosedForm};
}

RiskAverseBounds q_star_bounds_risk_averse(const ProtocolParams& params, Coin p0, double nu) {
  require_budget(p0);
  require_nu(nu);
  const BribeModel model = BribeModel::from(params);
  if (p0 >= model.threshold()) {
    throw StrongAdversaryError("p0 at or above the strong-adversary threshold; failure probability is 1");
  }
  return {{failure_lower_bound(model, p0, nu), Provenance::LowerBound},
          {failure_upper_bound(model, p0, nu), Provenance::UpperBound}};
}

Coin BribeAllocation::total() const { return std::accumulate(per_node.begin(), per_node.end(), 0.0); }

double withholding_lp_value(const ProtocolParams& params, double nu, const BribeAllocation& allocation) {
  if (static_cast<std::int64_t>(allocation.per_node.size()) != params.honest_count()) {
    throw std::invalid_argument("allocation needs one entry per non-Byzantine node");
  }
  const Coin cap = params.stake - params.clue_cost;
  std::vector<double> capacities(allocation.per_node.size());
  for (std::size_t i = 0; i < capacities.size(); ++i) {
    // Bribing a node beyond p_s - p_w buys nothing more.
    capacities[i] = withholding_ratio(nu, params.stake, params.clue_cost, std::min(allocation.per_node[i], cap));
  }
  const auto sol = solve_subset_packing(capacities, static_cast<std::size_t>(params.committee_size()));
  return std::clamp(sol.value, 0.0, 1.0);
}

ExactSolveResult solve_q_star_exact_small(const ProtocolParams& params, Coin p0, double nu,
                                          const ExactSearchOptions& options) {
  require_budget(p0);
  require_nu(nu);
  require_valid(params);
  const auto n = static_cast<std::size_t>(params.honest_count());
  const auto group = static_cast<std::size_t>(params.committee_size());
  if (n > kMaxExactHonestNodes) throw InstanceTooLargeError("exact solver supports at most 12 honest nodes");
  if (choose(n, group) > kMaxExactGroups) throw InstanceTooLargeError("exact solver supports at most 500 groups");

  ExactSolveResult result;
  result.q.provenance = Provenance::NumericalOptimum;
  result.allocation.per_node.assign(n, 0.0);
  if (p0 >= params.strong_adversary_threshold()) {
    result.q = {1.0, Provenance::ExactClosedForm};
    return result;
  }
  if (p0 == 0.0) return result;

  const Coin cap = params.stake - params.clue_cost;
  double best_value = -1.0;
  auto evaluate = [&](const std::vector<Coin>& shares) {
    ++result.lp_evaluations;
    const double v = withholding_lp_value(params, nu, BribeAllocation{shares});
    if (v > best_value) {
      best_value = v;
      result.allocation.per_node = shares;
    }
    return v;
  };

  // Equal splits over the first m nodes; the problem is symmetric in node labels.
  for (std::size_t m = group; m <= n; ++m) {
    std::vector<Coin> shares(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) shares[i] = p0 / static_cast<double>(m);
    evaluate(shares);
  }

  // Composition grid of the budget in `grid_steps` units, when it is small enough.
  const std::size_t steps = std::max<std::size_t>(options.grid_steps, 1);
  if (n >= 1 && choose(steps + n - 1, n - 1) <= 20000) {
    std::vector<std::size_t> units(n, 0);
    const auto recurse = [&](auto&& self, std::size_t idx, std::size_t left) -> void {
      if (idx + 1 == n) {
        units[idx] = left;
        std::vector<Coin> shares(n);
        for (std::size_t i = 0; i < n; ++i) {
          shares[i] = std::min(cap, p0 * static_cast<double>(units[i]) / static_cast<double>(steps));
        }
        evaluate(shares);
        return;
      }
      for (std::size_t u = 0; u <= left; ++u) {
        units[idx] = u;
        self(self, idx + 1, left - u);
      }
    };
    recurse(recurse, 0, steps);
  }

  // Pairwise transfers with a shrinking step, starting from `start`.
  auto refine = [&](std::vector<Coin> shares) {
    double current = evaluate(shares);
    double step = p0 / static_cast<double>(steps);
    const double min_step = 1e-12 * p0;
    while (step > min_step) {
      bool improved = false;
      for (std::size_t from = 0; from < n; ++from) {
        for (std::size_t to = 0; to < n; ++to) {
          if (from == to) continue;
          const double move = std::min({step, shares[from], cap - shares[to]});
          if (move <= 0.0) continue;
          auto trial = shares;
          trial[from] -= move;
          trial[to] += move;
          const double v = evaluate(trial);
          if (v > current + 1e-15) {
            current = v;
            shares = std::move(trial);
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
  };

  refine(result.allocation.per_node);
  Rng rng(options.seed);
  for (std::size_t s = 0; s < options.multistarts; ++s) {
    std::vector<Coin> weights(n);
    double sum = 0.0;
    for (auto& w : weights) {
      w = -std::log1p(-rng.uniform());
      sum += w;
    }
    std::vector<Coin> shares(n);
    for (std::size_t i = 0; i < n; ++i) shares[i] = std::min(cap, p0 * weights[i] / sum);
    refine(shares);
  }

  result.q.value = std::clamp(best_value, 0.0, 1.0);
  return result;
}

BribeBounds min_bribe_for_failure(const BribeModel& model, double nu, double target) {
  require_nu(nu);
  if (model.committee < 1) throw std::invalid_argument("committee size N - f - k + 1 must be at least 1");
  if (!(target > 0.0 && target <= 1.0)) throw std::invalid_argument("target failure probability must lie in (0, 1]");

  BribeBounds out;
  out.threshold = model.threshold();
  if (target >= 1.0) {
    out.p0_min = out.p0_max = out.threshold;
    out.saturated = true;
    return out;
  }
  const auto upper = [&](double p0) { return failure_upper_bound(model, p0, nu) - target; };
  const auto lower = [&](double p0) { return failure_lower_bound(model, p0, nu) - target; };
  if (upper(out.threshold) < 0.0 || lower(out.threshold) < 0.0) {
    out.p0_min = out.p0_max = out.threshold;
    out.saturated = true;
    return out;
  }
  out.p0_min = bisect(upper, 0.0, out.threshold);
  out.p0_max = bisect(lower, 0.0, out.threshold);
  return out;
}

BribeBounds min_bribe_for_failure(const ProtocolParams& params, double nu, double target) {
  return min_bribe_for_failure(BribeModel::from(params), nu, target);
}

double repeated_query_factor(double q_star, std::int64_t ell) {
  if (ell < 1) throw std::invalid_argument("query repetitions must be at least 1");
  if (!(q_star >= 0.0 && q_star <= 1.0)) throw std::invalid_argument("q* must be a probability");
  return q_star / static_cast<double>(ell);
}

double free_rider_indifference_gap(const ProtocolParams& params, Coin punishment, const UtilitySpec& u, double r) {
  // Probability that the other honest nodes post fewer than k clues.
  const double short_of_k = binomial_cdf_below(params.honest_count() - 1, r, params.threshold_k);
  const double withhold = short_of_k * utility(u, -params.stake) + (1.0 - short_of_k) * utility(u, -punishment);
  return withhold - utility(u, -params.clue_cost);
}

FreeRiderEquilibrium solve_free_rider(const ProtocolParams& params, Coin punishment, const UtilitySpec& u) {
  require_valid(params);
  if (punishment < 0.0) throw std::invalid_argument("punishment B must be non-negative");
  const std::int64_t n = params.honest_count();
  const std::int64_t k = params.threshold_k;
  auto gap = [&](double r) { return free_rider_indifference_gap(params, punishment, u, r); };

  FreeRiderEquilibrium eq;
  if (punishment >= params.clue_cost) {
    eq.r_star = 1.0;
    eq.failure = binomial_cdf_below(n, 1.0, k);
    eq.residual = gap(1.0);
    return eq;
  }
  const double g0 = gap(0.0);
  const double g1 = gap(1.0);
  if (g0 < 0.0 && g1 < 0.0) {
    // Posting beats withholding whatever the others do.
    eq.r_star = 1.0;
  } else if (g0 > 0.0 && g1 > 0.0) {
    eq.r_star = 0.0;
  } else {
    eq.r_star = bisect(gap, 0.0, 1.0);
    eq.interior = eq.r_star > 0.0 && eq.r_star < 1.0;
  }
  eq.residual = gap(eq.r_star);
  eq.failure = binomial_cdf_below(n, eq.r_star, k);
  return eq;
}

bool p1_supports_contract_path(const ProtocolParams& p, double nu, double q, Coin p1) {
  const double base = p.client_value - p.query_cost + p1;
  const double lhs = (1.0 - q) * std::pow(base, nu) + q * std::pow(base + p.compensation, nu);
  const double rhs = std::pow(p.client_value, nu);
  return lhs >= rhs * (1.0 - 1e-12);
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::SecureNoAttack: return "SecureNoAttack";
    case Regime::SecureWithoutContract: return "SecureWithoutContract";
    case Regime::ContractPathFailure: return "ContractPathFailure";
    case Regime::StrongAdversaryFailure: return "StrongAdversaryFailure";
    case Regime::ClientBribedFailure: return "ClientBribedFailure";
  }
  return "unknown";
}

nlohmann::ordered_json RegimeClassification::to_json() const {
  return {{"regime", to_string(regime)}, {"q", q.value}, {"provenance", to_string(q.provenance)}};
}

RegimeClassification classify_regime(const ProtocolParams& params, const AdversaryParams& adv,
                                     const UtilitySpec& utility) {
  const Coin p0 = adv.node_budget;
  const Coin p1 = adv.client_bribe;
  if (p1 > params.compensation - params.query_cost) {
    return {Regime::ClientBribedFailure, {1.0, Provenance::ExactClosedForm}};
  }
  if (p0 >= params.strong_adversary_threshold()) {
    return {Regime::StrongAdversaryFailure, {1.0, Provenance::ExactClosedForm}};
  }
  if (p0 == 0.0 && p1 == 0.0) {
    return {Regime::SecureNoAttack, {0.0, Provenance::ExactClosedForm}};
  }
  const FailureProbability q = utility.is_risk_neutral()
                                   ? q_star_risk_neutral(params, p0)
                                   : q_star_bounds_risk_averse(params, p0, utility.nu).upper;
  if (params.threshold_k == 1 && p0 < static_cast<double>(params.honest_count()) * params.clue_cost &&
      !p1_supports_contract_path(params, utility.nu, q.value, p1)) {
    return {Regime::SecureWithoutContract, {0.0, Provenance::ExactClosedForm}};
  }
  return {Regime::ContractPathFailure, q};
}

}  // namespace dac
