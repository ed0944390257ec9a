#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dac/contract.hpp"
#include "dac/model.hpp"

namespace dac {

struct GameConfig {
  ProtocolParams params;
  AdversaryParams adversary;
  UtilitySpec utility;  // node utility
  SlashingFunction slashing = OptimalSlashing{};
  std::vector<double> coins;  // withhold probability of each shared coin
  std::uint64_t rng_seed = 0;
};

namespace strategy {

// Replies over the network at slot 1, places after an on-chain query.
struct Honest {};
// Never replies over the network; places after an on-chain query.
struct PlaceOnly {};
struct Byzantine {};
// Never replies; places unless shared coin `coin` came up withhold.
struct BribedWithhold {
  std::size_t coin = 0;
};
// Never replies; places with probability r after an on-chain query.
struct FreeRider {
  double r = 1.0;
};

}  // namespace strategy

using NodeStrategy = std::variant<strategy::Honest, strategy::PlaceOnly, strategy::Byzantine,
                                  strategy::BribedWithhold, strategy::FreeRider>;

enum class ClientStrategy { Honest, AlwaysQuery, Silent };

std::string to_string(const NodeStrategy& s);
std::string to_string(ClientStrategy s);

/// Single-action unilateral deviation applied on top of a strategy profile.
struct Deviation {
  enum class Kind { FlipReply, FlipPlace, FlipQuery };
  Kind kind = Kind::FlipReply;
  std::size_t node = 0;  // ignored for FlipQuery
};

std::string to_string(Deviation::Kind k);

struct TranscriptEvent {
  int slot = 0;
  std::string actor;
  std::string action;
  std::string detail;

  nlohmann::ordered_json to_json() const;
};

struct GameOutcome {
  bool security_ok = false;
  bool queried = false;
  ActionVector replied;  // network clues at slot 1
  ActionVector placed;   // contract clues at slot 3
  std::vector<Coin> slash_amounts;
  Coin compensation_paid = 0.0;
  std::vector<Coin> bribes_paid;
  Coin client_bribe_paid = 0.0;
  std::vector<Coin> node_net_payoffs;
  Coin client_net_payoff = 0.0;
  std::vector<TranscriptEvent> transcript;
};

struct GameOptions {
  std::optional<Deviation> deviation;
  bool record_transcript = true;
};

/// Plays slots 1..4 once. All randomness (shared coins, free-rider draws) is
/// drawn from config.rng_seed before slot 1, so a deviation replayed with the
/// same seed sees the same coins.
GameOutcome run_game(const GameConfig& config, const std::vector<NodeStrategy>& nodes, ClientStrategy client,
                     const GameOptions& options = {});

/// Failure counts with a 99% normal-approximation halfwidth.
struct MonteCarloSummary {
  std::size_t trials = 0;
  std::size_t failures = 0;
  std::size_t queries = 0;
  double rate = 0.0;
  double ci99 = 0.0;

  // Three-sigma band around `expected` with binomial sigma at `expected`.
  bool within_3_sigma(double expected) const;
  nlohmann::ordered_json to_json() const;
};

double ci99_halfwidth(double rate, std::size_t trials);

/// Trial i is played with seed derive_seed(seed, i).
MonteCarloSummary monte_carlo_failure(GameConfig config, const std::vector<NodeStrategy>& nodes,
                                      ClientStrategy client, std::size_t trials, std::uint64_t seed);

/// Two-stage reward game: every member answers over the network with
/// probability q_network; if nobody did, the client complains on the contract
/// and every member answers there with probability q_contract.
MonteCarloSummary monte_carlo_reward_game(std::int64_t n_members, double q_network, double q_contract,
                                          std::size_t trials, std::uint64_t seed);

/// Profile used for the contract-path attack: the first N - f - k + 1 honest
/// nodes follow shared coin 0, the other honest nodes only place, and the
/// last f nodes are Byzantine.
std::vector<NodeStrategy> bribed_committee_profile(const ProtocolParams& params);

std::vector<NodeStrategy> honest_profile(const ProtocolParams& params);

struct RepeatedGameConfig {
  std::size_t rounds = 0;
  double discount = 0.9;
  double coin_withhold_prob = 0.0;
  bool grim_trigger = true;
  // Rounds are numbered from 1. The adversary offers bribes up to and including this round.
  std::optional<std::size_t> bribe_until_round;
  // (node, round) pairs at which a bribed node does the opposite of its instruction.
  std::vector<std::pair<std::size_t, std::size_t>> injected_defections;
};

struct RoundRecord {
  std::size_t round = 0;
  bool coin_withhold = false;
  bool bribes_offered = false;
  std::size_t defections = 0;
  bool failure = false;
  std::vector<Coin> bribe_income;  // per bribed node
  std::vector<double> utilities;   // per bribed node
};

struct RepeatedGameResult {
  std::vector<std::size_t> bribed_nodes;
  Coin bribe_per_node = 0.0;
  std::vector<RoundRecord> rounds;
  std::vector<double> discounted_utility;  // per bribed node
  std::vector<double> average_utility;     // per bribed node
  double mean_average_utility = 0.0;       // over bribed nodes
  double single_stage_expected = 0.0;
  double single_stage_sigma = 0.0;  // per-round standard deviation of one node's utility

  nlohmann::ordered_json summary_json() const;
};

/// Repeated contract-path attack against the bribed committee. A node whose
/// action differs from its instruction is a defector: it earns no bribe that
/// round and, under grim trigger, none afterwards. Once the adversary skips a
/// round's offer every node stops cooperating for good.
RepeatedGameResult run_repeated_game(const GameConfig& config, const RepeatedGameConfig& repeated,
                                     std::uint64_t seed);

/// Expected per-round utility and its standard deviation for one bribed node
/// in the single-stage game with coin probability q.
std::pair<double, double> single_stage_bribed_utility(const GameConfig& config, double q);

struct DeviationGain {
  std::string participant;
  std::string deviation;
  double gain = 0.0;
  double ci99 = 0.0;

  bool profitable() const { return gain - ci99 > 1e-12; }
  nlohmann::ordered_json to_json() const;
};

struct DeviationReport {
  std::vector<DeviationGain> gains;

  // Largest estimated gain for each participant, in participant order.
  std::vector<DeviationGain> max_per_participant() const;
  bool equilibrium() const;
};

inline constexpr std::size_t kMaxDeviationNodes = 10;

/// Estimates each unilateral single-action deviation's utility change with
/// paired seeds. Throws std::invalid_argument for more than 10 nodes.
DeviationReport check_no_profitable_deviation(const GameConfig& config, const std::vector<NodeStrategy>& nodes,
                                              ClientStrategy client, std::size_t trials, std::uint64_t seed);

}  // namespace dac
