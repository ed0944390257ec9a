#include "dac/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dac {

UtilitySpec UtilitySpec::for_nodes(double nu, const ProtocolParams& params) {
  if (!(nu > 0.0 && nu <= 1.0)) {
    throw std::invalid_argument("utility exponent nu must lie in (0, 1]");
  }
  if (nu == 1.0) return risk_neutral();
  return {nu, params.stake + params.clue_cost};
}

ActionVector ActionVector::from_mask(std::uint64_t mask, std::size_t n) {
  ActionVector x(n);
  for (std::size_t i = 0; i < n; ++i) x.set(i, ((mask >> i) & 1u) != 0);
  return x;
}

std::size_t ActionVector::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true));
}

std::string ActionVector::to_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (bool b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

double utility(const UtilitySpec& spec, Coin net_payoff) {
  const double wealth = spec.baseline + net_payoff;
  if (spec.nu == 1.0) return wealth;
  if (wealth < 0.0) {
    // Full slashing of the baseline lands on zero up to rounding.
    if (wealth > -1e-12 * std::max(1.0, spec.baseline)) return 0.0;
    throw std::domain_error("negative wealth under a fractional utility exponent");
  }
  return std::pow(wealth, spec.nu);
}

std::vector<std::string> validate(const ProtocolParams& p) {
  std::vector<std::string> out;
  if (p.n_nodes < 1) out.emplace_back("N >= 1");
  if (p.n_byzantine < 0) out.emplace_back("f >= 0");
  if (p.threshold_k < 1) out.emplace_back("k >= 1");
  if (p.threshold_k > p.n_nodes - p.n_byzantine) out.emplace_back("k <= N-f");
  if (!(p.query_cost < p.compensation)) out.emplace_back("p_c < p_comp");
  if (!(p.compensation < p.stake)) out.emplace_back("p_comp < p_s");
  if (!(p.compensation < p.client_value)) out.emplace_back("p_comp < p_f");
  if (!(p.clue_cost >= 0.0)) out.emplace_back("p_w >= 0");
  if (!(p.stake > p.clue_cost)) out.emplace_back("p_s > p_w");
  if (!(p.epsilon_slash > 0.0)) out.emplace_back("epsilon > 0");
  return out;
}

void require_valid(const ProtocolParams& params) {
  const auto violations = validate(params);
  if (violations.empty()) return;
  std::ostringstream msg;
  msg << "invalid protocol parameters:";
  for (const auto& v : violations) msg << " [" << v << "]";
  throw std::invalid_argument(msg.str());
}

ProtocolParams ethereum_reference_params() {
  ProtocolParams p;
  p.n_nodes = 300000;
  p.n_byzantine = 100000;
  p.threshold_k = 100001;
  p.stake = 32.0;
  p.clue_cost = 0.0226;
  p.query_cost = 0.01;
  p.client_value = 10.0;
  p.compensation = 1.0;
  p.epsilon_slash = 0.001;
  return p;
}

}  // namespace dac
