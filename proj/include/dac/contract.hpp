#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dac/model.hpp"

namespace dac {

/// The slashing contract: idle nodes lose p_w + epsilon when at least k clues
/// arrived, and their whole stake otherwise; the client is compensated with
/// p_comp when fewer than k clues arrived.
struct OptimalSlashing {};

/// Same shape as OptimalSlashing but idle nodes lose `punishment` while
/// recovery succeeded. With punishment < p_w this admits free riding.
struct CustomPunishment {
  Coin punishment = 0.0;
};

using SlashingFunction = std::variant<OptimalSlashing, CustomPunishment>;

/// Penalty applied to an idle node when at least k clues arrived.
Coin safe_idle_penalty(const SlashingFunction& fn, const ProtocolParams& params);

std::string describe(const SlashingFunction& fn);

/// Throws std::invalid_argument if x.size() != N.
PayoffReport slash(const SlashingFunction& fn, const ProtocolParams& params, const ActionVector& x);

// Black-box view used by the axiom checkers, so arbitrary contracts can be audited.
using SlashEvaluator = std::function<PayoffReport(const ActionVector&)>;

SlashEvaluator make_evaluator(const SlashingFunction& fn, const ProtocolParams& params);

struct CheckMode {
  enum class Kind { Exhaustive, Sampled };
  Kind kind = Kind::Exhaustive;
  std::size_t trials = 0;
  std::uint64_t seed = 0;

  static CheckMode exhaustive() { return {}; }
  static CheckMode sampled(std::size_t trials, std::uint64_t seed) {
    return {Kind::Sampled, trials, seed};
  }
  std::string name() const { return kind == Kind::Exhaustive ? "exhaustive" : "sampled"; }
};

inline constexpr std::size_t kMaxExhaustiveNodes = 12;

struct Counterexample {
  ActionVector x;
  std::vector<std::size_t> permutation;  // empty unless the symmetry axiom failed
  std::string reason;
};

struct AxiomCheckResult {
  std::string axiom;
  std::string mode;
  std::size_t tested = 0;
  bool passed = true;
  std::optional<Counterexample> counterexample;

  nlohmann::ordered_json to_json() const;
};

/// A1. In exhaustive mode every action vector is paired with every
/// transposition; transpositions generate all permutations, so passing
/// implies equivariance under every permutation.
AxiomCheckResult check_symmetry(const SlashEvaluator& fn, std::size_t n_nodes, CheckMode mode);

/// A2: f_i(x) <= 0 for all i and f_client(x) + sum_i f_i(x) <= 0.
AxiomCheckResult check_no_reward(const SlashEvaluator& fn, std::size_t n_nodes, CheckMode mode);

/// A4: f_i(x) >= -bound whenever at least k clues arrived.
AxiomCheckResult check_minimal_punishment(const SlashEvaluator& fn, std::size_t n_nodes,
                                          std::size_t threshold_k, Coin bound, CheckMode mode);

}  // namespace dac
