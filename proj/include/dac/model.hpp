#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dac {

// Coin amounts are in ETH throughout; USD only appears as a display conversion.
using Coin = double;

/// Protocol parameters of one committee deployment.
///
/// Byzantine nodes are, by convention, the last `n_byzantine` indices.
struct ProtocolParams {
  std::int64_t n_nodes = 0;
  std::int64_t n_byzantine = 0;
  std::int64_t threshold_k = 1;
  Coin stake = 0.0;           // p_s, collateral per node
  Coin clue_cost = 0.0;       // p_w, cost of posting a clue on-chain
  Coin query_cost = 0.0;      // p_c, cost of posting a query on-chain
  Coin client_value = 0.0;    // p_f, client's payoff for a timely answer
  Coin compensation = 0.0;    // p_comp, paid to the client when recovery fails
  Coin epsilon_slash = 0.0;   // extra punishment above p_w for idle nodes

  // Payoffs are realized at the beginning of this slot.
  static constexpr int kAnswerSlot = 4;

  std::int64_t honest_count() const { return n_nodes - n_byzantine; }

  // N - f - k + 1: how many non-Byzantine nodes must withhold to break recovery.
  std::int64_t committee_size() const { return n_nodes - n_byzantine - threshold_k + 1; }

  // Total node bribe at which the contract path fails with probability 1.
  Coin strong_adversary_threshold() const {
    return static_cast<double>(committee_size()) * (stake - clue_cost);
  }

  bool is_byzantine(std::size_t node) const {
    return static_cast<std::int64_t>(node) >= honest_count();
  }
};

/// Budgets of a (p0, p1)-adversary beyond the f corrupted nodes.
struct AdversaryParams {
  Coin node_budget = 0.0;   // p0
  Coin client_bribe = 0.0;  // p1
};

/// U(x) = (baseline + x)^nu over the net payoff x of one game.
struct UtilitySpec {
  double nu = 1.0;
  Coin baseline = 0.0;

  static UtilitySpec risk_neutral() { return {1.0, 0.0}; }

  // Baseline wealth is stake + clue cost for risk-averse nodes, 0 for nu = 1.
  static UtilitySpec for_nodes(double nu, const ProtocolParams& params);

  bool is_risk_neutral() const { return nu == 1.0; }
};

/// Response bitmap fed to the slashing function: bit i set iff node i
/// posted a valid clue one slot after the on-chain query.
class ActionVector {
 public:
  ActionVector() = default;
  explicit ActionVector(std::size_t n) : bits_(n, false) {}
  explicit ActionVector(std::vector<bool> bits) : bits_(std::move(bits)) {}

  // Bit i of `mask` becomes entry i.
  static ActionVector from_mask(std::uint64_t mask, std::size_t n);
  static ActionVector all(std::size_t n, bool value) { return ActionVector(std::vector<bool>(n, value)); }

  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i]; }
  void set(std::size_t i, bool v) { bits_[i] = v; }
  std::size_t count() const;

  // "1011" style rendering, node 0 first.
  std::string to_string() const;

  friend bool operator==(const ActionVector&, const ActionVector&) = default;

 private:
  std::vector<bool> bits_;
};

struct PayoffReport {
  std::vector<Coin> node_payoffs;
  Coin client_payoff = 0.0;
};

/// Evaluates U for the given net payoff. Throws std::domain_error when the
/// resulting wealth is negative and nu < 1.
double utility(const UtilitySpec& spec, Coin net_payoff);

/// Names every violated parameter constraint; empty means valid.
std::vector<std::string> validate(const ProtocolParams& params);

/// Throws std::invalid_argument listing the violations, if any.
void require_valid(const ProtocolParams& params);

/// Parameters of the Ethereum deployment used for the bribe-bound table:
/// N = 300000, one third Byzantine, N - f - k + 1 = N / 3, p_s = 32, p_w = 0.0226.
ProtocolParams ethereum_reference_params();

}  // namespace dac
