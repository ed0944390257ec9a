#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dac/model.hpp"

namespace dac {

enum class Provenance { ExactClosedForm, LowerBound, UpperBound, NumericalOptimum, MonteCarlo };

std::string to_string(Provenance p);

/// Probability that fewer than k clues reach the contract, tagged with how
/// it was obtained. Bounds carry their direction in the provenance.
struct FailureProbability {
  double value = 0.0;
  Provenance provenance = Provenance::ExactClosedForm;
  std::size_t trials = 0;     // Monte Carlo only
  double ci_halfwidth = 0.0;  // Monte Carlo only
};

/// Raised when p0 reaches (N - f - k + 1)(p_s - p_w): the contract path then
/// fails with probability 1 and the bounds no longer apply.
class StrongAdversaryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class InstanceTooLargeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The three numbers every bribe-bound formula depends on.
struct BribeModel {
  std::int64_t committee = 1;  // N - f - k + 1
  Coin stake = 0.0;
  Coin clue_cost = 0.0;

  static BribeModel from(const ProtocolParams& params) {
    return {params.committee_size(), params.stake, params.clue_cost};
  }
  Coin threshold() const { return static_cast<double>(committee) * (stake - clue_cost); }
};

/// Largest withholding probability a node accepts for a bribe b:
///   ((p_s + b)^nu - p_s^nu) / ((p_s + b)^nu - (p_w + b)^nu).
/// Equals b / (p_s - p_w) at nu = 1 and reaches 1 at b = p_s - p_w.
double withholding_ratio(double nu, Coin stake, Coin clue_cost, Coin bribe);

/// Lower bound on the worst-equilibrium failure probability for total bribe p0.
double failure_lower_bound(const BribeModel& model, Coin p0, double nu);

/// Upper bound: min(p0 / (p_s - p_w), ratio at b = p0) / (N - f - k + 1).
double failure_upper_bound(const BribeModel& model, Coin p0, double nu);

/// Risk-neutral failure probability min(1, p0 / ((N - f - k + 1)(p_s - p_w))).
FailureProbability q_star_risk_neutral(const ProtocolParams& params, Coin p0);

struct RiskAverseBounds {
  FailureProbability lower;
  FailureProbability upper;
};

/// Throws StrongAdversaryError when p0 is at or above the strong-adversary threshold.
RiskAverseBounds q_star_bounds_risk_averse(const ProtocolParams& params, Coin p0, double nu);

struct BribeAllocation {
  std::vector<Coin> per_node;  // one entry per non-Byzantine node

  Coin total() const;
};

struct ExactSearchOptions {
  std::size_t grid_steps = 40;  // budget units for the composition grid
  std::size_t multistarts = 8;  // random simplex starts
  std::uint64_t seed = 1;
};

struct ExactSolveResult {
  FailureProbability q;
  BribeAllocation allocation;
  std::size_t lp_evaluations = 0;
};

inline constexpr std::size_t kMaxExactHonestNodes = 12;
inline constexpr std::uint64_t kMaxExactGroups = 500;

/// Value of the inner linear program for a fixed bribe allocation: the
/// largest total mass of withholding groups (N - f - k + 1 members each)
/// such that every node's share stays within its withholding ratio.
double withholding_lp_value(const ProtocolParams& params, double nu, const BribeAllocation& allocation);

/// Worst-equilibrium failure probability for small instances. The outer
/// problem over bribe allocations is not convex; it is searched with equal
/// splits, a composition grid and seeded multistart pairwise-transfer
/// refinement. Throws InstanceTooLargeError beyond 12 honest nodes or 500 groups.
ExactSolveResult solve_q_star_exact_small(const ProtocolParams& params, Coin p0, double nu,
                                          const ExactSearchOptions& options = {});

/// Range of total bribes that push the failure probability to `target`:
/// p0_min solves upper bound = target, p0_max solves lower bound = target.
struct BribeBounds {
  Coin p0_min = 0.0;
  Coin p0_max = 0.0;
  bool saturated = false;  // target only reached at the strong-adversary threshold
  Coin threshold = 0.0;
};

BribeBounds min_bribe_for_failure(const BribeModel& model, double nu, double target);
BribeBounds min_bribe_for_failure(const ProtocolParams& params, double nu, double target);

/// Per-campaign withholding probability when the client may repeat its query ell times.
double repeated_query_factor(double q_star, std::int64_t ell);

/// Mixed equilibrium of the under-punishing contract CustomPunishment(B):
/// each honest node posts its clue with probability r_star.
struct FreeRiderEquilibrium {
  double r_star = 1.0;
  double failure = 0.0;   // Pr[Binomial(N - f, r_star) < k]
  double residual = 0.0;  // indifference gap at r_star
  bool interior = false;  // r_star solves the indifference equation in (0, 1)
};

/// Utility of withholding minus utility of posting, given the other honest
/// nodes post independently with probability r.
double free_rider_indifference_gap(const ProtocolParams& params, Coin punishment, const UtilitySpec& utility,
                                   double r);

FreeRiderEquilibrium solve_free_rider(const ProtocolParams& params, Coin punishment, const UtilitySpec& utility);

/// True iff a bribe p1 makes the client prefer querying the contract even after
/// network clues arrived: (1-q)(p_f-p_c+p1)^nu + q(p_f-p_c+p1+p_comp)^nu >= p_f^nu.
bool p1_supports_contract_path(const ProtocolParams& params, double nu, double q_star, Coin p1);

enum class Regime {
  SecureNoAttack,
  SecureWithoutContract,
  ContractPathFailure,
  StrongAdversaryFailure,
  ClientBribedFailure,
};

std::string to_string(Regime r);

struct RegimeClassification {
  Regime regime = Regime::SecureNoAttack;
  FailureProbability q;

  nlohmann::ordered_json to_json() const;
};

/// Total over all (params, adversary, utility); "overwhelming probability" maps to 1.
RegimeClassification classify_regime(const ProtocolParams& params, const AdversaryParams& adversary,
                                     const UtilitySpec& utility);

}  // namespace dac
