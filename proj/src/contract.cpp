#include "dac/contract.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dac/rng.hpp"

namespace dac {
namespace {

constexpr double kSlack = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_exhaustive_size(std::size_t n) {
  if (n > kMaxExhaustiveNodes) {
    throw std::invalid_argument("exhaustive axiom checks are limited to N <= 12; use sampled mode");
  }
}

ActionVector random_vector(Rng& rng, std::size_t n) {
  ActionVector x(n);
  for (std::size_t i = 0; i < n; ++i) x.set(i, (rng.next() >> 63) != 0);
  return x;
}

// Visits action vectors in increasing mask order (exhaustive) or as seeded
// draws (sampled). Stops when `visit` returns false.
template <class Visit>
void for_each_vector(std::size_t n, const CheckMode& mode, Visit&& visit) {
  if (mode.kind == CheckMode::Kind::Exhaustive) {
    require_exhaustive_size(n);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      if (!visit(ActionVector::from_mask(mask, n))) return;
    }
    return;
  }
  Rng rng(mode.seed);
  for (std::size_t t = 0; t < mode.trials; ++t) {
    if (!visit(random_vector(rng, n))) return;
  }
}

// (pi x)[pi[i]] = x[i]
ActionVector permute(const ActionVector& x, const std::vector<std::size_t>& pi) {
  ActionVector y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y.set(pi[i], x[i]);
  return y;
}

std::optional<std::string> equivariance_violation(const SlashEvaluator& fn, const ActionVector& x,
                                                  const std::vector<std::size_t>& pi) {
  const PayoffReport base = fn(x);
  const PayoffReport moved = fn(permute(x, pi));
  if (base.client_payoff != moved.client_payoff) return "client payoff changed under permutation";
  for (std::size_t i = 0; i < pi.size(); ++i) {
    if (moved.node_payoffs[pi[i]] != base.node_payoffs[i]) {
      std::ostringstream os;
      os << "node " << i << " payoff " << base.node_payoffs[i] << " maps to "
         << moved.node_payoffs[pi[i]] << " at node " << pi[i];
      return os.str();
    }
  }
  return std::nullopt;
}

}  // namespace

Coin safe_idle_penalty(const SlashingFunction& fn, const ProtocolParams& params) {
  return std::visit(Overloaded{[&](const OptimalSlashing&) { return params.clue_cost + params.epsilon_slash; },
                               [](const CustomPunishment& c) { return c.punishment; }},
                    fn);
}

std::string describe(const SlashingFunction& fn) {
  return std::visit(Overloaded{[](const OptimalSlashing&) { return std::string("optimal"); },
                               [](const CustomPunishment& c) {
                                 std::ostringstream os;
                                 os << "custom(B=" << c.punishment << ")";
                                 return os.str();
                               }},
                    fn);
}

PayoffReport slash(const SlashingFunction& fn, const ProtocolParams& params, const ActionVector& x) {
  if (static_cast<std::int64_t>(x.size()) != params.n_nodes) {
    throw std::invalid_argument("action vector length differs from N");
  }
  const bool recovered = static_cast<std::int64_t>(x.count()) >= params.threshold_k;
  const Coin idle_penalty = recovered ? safe_idle_penalty(fn, params) : params.stake;

  PayoffReport report;
  report.node_payoffs.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) report.node_payoffs[i] = x[i] ? 0.0 : -idle_penalty;
  report.client_payoff = recovered ? 0.0 : params.compensation;
  return report;
}

SlashEvaluator make_evaluator(const SlashingFunction& fn, const ProtocolParams& params) {
  return [fn, params](const ActionVector& x) { return slash(fn, params, x); };
}

nlohmann::ordered_json AxiomCheckResult::to_json() const {
  nlohmann::ordered_json j{{"axiom", axiom}, {"mode", mode}, {"tested", tested}, {"result", passed ? "pass" : "fail"}};
  if (counterexample) {
    nlohmann::ordered_json ce{{"x", counterexample->x.to_string()}, {"reason", counterexample->reason}};
    if (!counterexample->permutation.empty()) ce["permutation"] = counterexample->permutation;
    j["counterexample"] = std::move(ce);
  }
  return j;
}

AxiomCheckResult check_symmetry(const SlashEvaluator& fn, std::size_t n, CheckMode mode) {
  AxiomCheckResult result;
  result.axiom = "A1-symmetry";
  result.mode = mode.name();
  auto record = [&](const ActionVector& x, const std::vector<std::size_t>& pi) {
    ++result.tested;
    if (auto why = equivariance_violation(fn, x, pi)) {
      result.passed = false;
      result.counterexample = Counterexample{x, pi, *why};
      return false;
    }
    return true;
  };

  if (mode.kind == CheckMode::Kind::Exhaustive) {
    std::vector<std::size_t> identity(n);
    std::iota(identity.begin(), identity.end(), std::size_t{0});
    for_each_vector(n, mode, [&](const ActionVector& x) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          auto pi = identity;
          std::swap(pi[i], pi[j]);
          if (!record(x, pi)) return false;
        }
      }
      return true;
    });
    return result;
  }

  Rng rng(mode.seed);
  for (std::size_t t = 0; t < mode.trials && result.passed; ++t) {
    const ActionVector x = random_vector(rng, n);
    std::vector<std::size_t> pi(n);
    std::iota(pi.begin(), pi.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(pi[i - 1], pi[rng.below(i)]);
    record(x, pi);
  }
  return result;
}

AxiomCheckResult check_no_reward(const SlashEvaluator& fn, std::size_t n, CheckMode mode) {
  AxiomCheckResult result;
  result.axiom = "A2-no-reward";
  result.mode = mode.name();
  for_each_vector(n, mode, [&](const ActionVector& x) {
    ++result.tested;
    const PayoffReport r = fn(x);
    double total = r.client_payoff;
    for (std::size_t i = 0; i < r.node_payoffs.size(); ++i) {
      if (r.node_payoffs[i] > kSlack) {
        std::ostringstream os;
        os << "node " << i << " rewarded " << r.node_payoffs[i];
        result.passed = false;
        result.counterexample = Counterexample{x, {}, os.str()};
        return false;
      }
      total += r.node_payoffs[i];
    }
    if (total > kSlack) {
      std::ostringstream os;
      os << "client plus node payoffs sum to " << total;
      result.passed = false;
      result.counterexample = Counterexample{x, {}, os.str()};
      return false;
    }
    return true;
  });
  return result;
}

AxiomCheckResult check_minimal_punishment(const SlashEvaluator& fn, std::size_t n, std::size_t threshold_k,
                                          Coin bound, CheckMode mode) {
  AxiomCheckResult result;
  result.axiom = "A4-minimal-punishment";
  result.mode = mode.name();
  for_each_vector(n, mode, [&](const ActionVector& x) {
    if (x.count() < threshold_k) return true;
    ++result.tested;
    const PayoffReport r = fn(x);
    for (std::size_t i = 0; i < r.node_payoffs.size(); ++i) {
      if (r.node_payoffs[i] < -bound - kSlack) {
        std::ostringstream os;
        os << "node " << i << " punished " << -r.node_payoffs[i] << " > bound " << bound;
        result.passed = false;
        result.counterexample = Counterexample{x, {}, os.str()};
        return false;
      }
    }
    return true;
  });
  return result;
}

}  // namespace dac
