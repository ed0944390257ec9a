#include "dac/game_sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "dac/rng.hpp"

namespace dac {
namespace {

constexpr double kZ99 = 2.5758293035489;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string node_name(std::size_t i) { return "node" + std::to_string(i); }

bool is_byzantine(const NodeStrategy& s) { return std::holds_alternative<strategy::Byzantine>(s); }

struct Draws {
  std::vector<bool> coin_withhold;
  std::vector<double> node_uniform;
};

Draws draw(const GameConfig& config, std::size_t n) {
  Rng rng(config.rng_seed);
  Draws d;
  d.coin_withhold.reserve(config.coins.size());
  for (double p : config.coins) d.coin_withhold.push_back(rng.bernoulli(p));
  d.node_uniform.resize(n);
  for (auto& u : d.node_uniform) u = rng.uniform();
  return d;
}

bool wants_reply(const NodeStrategy& s) { return std::holds_alternative<strategy::Honest>(s); }

bool wants_place(const NodeStrategy& s, const Draws& d, std::size_t i) {
  return std::visit(Overloaded{[](const strategy::Honest&) { return true; },
                               [](const strategy::PlaceOnly&) { return true; },
                               [](const strategy::Byzantine&) { return false; },
                               [&](const strategy::BribedWithhold& b) { return !d.coin_withhold[b.coin]; },
                               [&](const strategy::FreeRider& f) { return d.node_uniform[i] < f.r; }},
                    s);
}

void validate_profile(const GameConfig& config, const std::vector<NodeStrategy>& nodes) {
  require_valid(config.params);
  if (static_cast<std::int64_t>(nodes.size()) != config.params.n_nodes) {
    throw std::invalid_argument("strategy list length must equal N");
  }
  for (double p : config.coins) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("coin probabilities must lie in [0, 1]");
  }
  for (const auto& s : nodes) {
    if (const auto* b = std::get_if<strategy::BribedWithhold>(&s); b && b->coin >= config.coins.size()) {
      throw std::invalid_argument("bribed node refers to a missing shared coin");
    }
    if (const auto* f = std::get_if<strategy::FreeRider>(&s); f && !(f->r >= 0.0 && f->r <= 1.0)) {
      throw std::invalid_argument("free-rider probability must lie in [0, 1]");
    }
  }
}

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
  }
  double mean(std::size_t n) const { return sum / static_cast<double>(n); }
  double ci99(std::size_t n) const {
    if (n < 2) return 0.0;
    const double m = mean(n);
    const double var = std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
    return kZ99 * std::sqrt(var / static_cast<double>(n));
  }
};

}  // namespace

std::string to_string(const NodeStrategy& s) {
  return std::visit(Overloaded{[](const strategy::Honest&) -> std::string { return "honest"; },
                               [](const strategy::PlaceOnly&) -> std::string { return "place-only"; },
                               [](const strategy::Byzantine&) -> std::string { return "byzantine"; },
                               [](const strategy::BribedWithhold& b) {
                                 return "bribed-withhold(coin=" + std::to_string(b.coin) + ")";
                               },
                               [](const strategy::FreeRider& f) { return "free-rider(r=" + fmt(f.r) + ")"; }},
                    s);
}

std::string to_string(ClientStrategy s) {
  switch (s) {
    case ClientStrategy::Honest: return "honest";
    case ClientStrategy::AlwaysQuery: return "always-query";
    case ClientStrategy::Silent: return "silent";
  }
  return "unknown";
}

std::string to_string(Deviation::Kind k) {
  switch (k) {
    case Deviation::Kind::FlipReply: return "flip-reply";
    case Deviation::Kind::FlipPlace: return "flip-place";
    case Deviation::Kind::FlipQuery: return "flip-query";
  }
  return "unknown";
}

nlohmann::ordered_json TranscriptEvent::to_json() const {
  return nlohmann::ordered_json{{"slot", slot}, {"actor", actor}, {"action", action}, {"detail", detail}};
}

GameOutcome run_game(const GameConfig& config, const std::vector<NodeStrategy>& nodes, ClientStrategy client,
                     const GameOptions& options) {
  validate_profile(config, nodes);
  const ProtocolParams& p = config.params;
  const std::size_t n = nodes.size();
  const Draws d = draw(config, n);
  const auto& dev = options.deviation;
  auto deviates = [&](Deviation::Kind kind, std::size_t i) {
    return dev && dev->kind == kind && (kind == Deviation::Kind::FlipQuery || dev->node == i);
  };

  GameOutcome out;
  auto log = [&](int slot, std::string actor, std::string action, std::string detail) {
    if (options.record_transcript) {
      out.transcript.push_back({slot, std::move(actor), std::move(action), std::move(detail)});
    }
  };

  // Slot 1: network replies, delivered by the end of the slot.
  out.replied = ActionVector(n);
  for (std::size_t i = 0; i < n; ++i) {
    bool reply = wants_reply(nodes[i]);
    if (deviates(Deviation::Kind::FlipReply, i)) reply = !reply;
    if (reply) {
      out.replied.set(i, true);
      log(1, node_name(i), "reply", "network");
    }
  }
  const std::size_t network_clues = out.replied.count();

  // Slot 2: the client sees what arrived in slot 1.
  switch (client) {
    case ClientStrategy::Honest: out.queried = static_cast<std::int64_t>(network_clues) < p.threshold_k; break;
    case ClientStrategy::AlwaysQuery: out.queried = true; break;
    case ClientStrategy::Silent: out.queried = false; break;
  }
  if (deviates(Deviation::Kind::FlipQuery, 0)) out.queried = !out.queried;
  if (out.queried) log(2, "client", "query", "network_clues=" + std::to_string(network_clues));

  // Slot 3: nodes see the query recorded at the end of slot 2 and place; the
  // contract slashes at the end of the slot.
  out.placed = ActionVector(n);
  out.slash_amounts.assign(n, 0.0);
  if (out.queried) {
    for (std::size_t i = 0; i < n; ++i) {
      bool place = wants_place(nodes[i], d, i);
      if (deviates(Deviation::Kind::FlipPlace, i)) place = !place;
      if (place) {
        out.placed.set(i, true);
        log(3, node_name(i), "place", "contract");
      }
    }
    const PayoffReport r = slash(config.slashing, p, out.placed);
    out.slash_amounts = r.node_payoffs;
    out.compensation_paid = r.client_payoff;
    for (std::size_t i = 0; i < n; ++i) {
      if (out.slash_amounts[i] != 0.0) log(3, "contract", "slash", node_name(i) + " " + fmt(out.slash_amounts[i]));
    }
    if (out.compensation_paid != 0.0) log(3, "contract", "compensate", "client " + fmt(out.compensation_paid));
  }

  // Slot 4: payoffs are realized.
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_byzantine(nodes[i]) && (out.replied[i] || out.placed[i])) ++distinct;
  }
  out.security_ok = static_cast<std::int64_t>(distinct) >= p.threshold_k;

  const auto n_bribed = static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const auto& s) {
    return std::holds_alternative<strategy::BribedWithhold>(s);
  }));
  const Coin per_node_bribe = n_bribed > 0 ? config.adversary.node_budget / static_cast<double>(n_bribed) : 0.0;

  out.bribes_paid.assign(n, 0.0);
  out.node_net_payoffs.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (const auto* b = std::get_if<strategy::BribedWithhold>(&nodes[i])) {
      const bool complied = !out.replied[i] && (!out.queried || out.placed[i] == !d.coin_withhold[b->coin]);
      if (complied && per_node_bribe > 0.0) {
        out.bribes_paid[i] = per_node_bribe;
        log(4, "adversary", "bribe", node_name(i) + " " + fmt(per_node_bribe));
      }
    }
    out.node_net_payoffs[i] = (out.placed[i] ? -p.clue_cost : 0.0) + out.slash_amounts[i] + out.bribes_paid[i];
  }

  const bool client_complied = (client == ClientStrategy::AlwaysQuery && out.queried) ||
                               (client == ClientStrategy::Silent && !out.queried);
  if (client_complied && config.adversary.client_bribe > 0.0) {
    out.client_bribe_paid = config.adversary.client_bribe;
    log(4, "adversary", "bribe", "client " + fmt(out.client_bribe_paid));
  }
  out.client_net_payoff = (out.security_ok ? p.client_value : 0.0) - (out.queried ? p.query_cost : 0.0) +
                          out.compensation_paid + out.client_bribe_paid;
  log(4, "client", "outcome", std::string(out.security_ok ? "secure" : "failed") + " clues=" + std::to_string(distinct));
  return out;
}

double ci99_halfwidth(double rate, std::size_t trials) {
  if (trials == 0) return 0.0;
  return kZ99 * std::sqrt(rate * (1.0 - rate) / static_cast<double>(trials));
}

bool MonteCarloSummary::within_3_sigma(double expected) const {
  const double sigma = std::sqrt(expected * (1.0 - expected) / static_cast<double>(trials));
  return std::abs(rate - expected) <= 3.0 * sigma;
}

nlohmann::ordered_json MonteCarloSummary::to_json() const {
  return nlohmann::ordered_json{{"trials", trials}, {"failures", failures}, {"rate", rate}, {"ci99", ci99}};
}

MonteCarloSummary monte_carlo_failure(GameConfig config, const std::vector<NodeStrategy>& nodes,
                                      ClientStrategy client, std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  GameOptions options;
  options.record_transcript = false;
  MonteCarloSummary s;
  s.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    config.rng_seed = derive_seed(seed, t);
    const GameOutcome o = run_game(config, nodes, client, options);
    if (!o.security_ok) ++s.failures;
    if (o.queried) ++s.queries;
  }
  s.rate = static_cast<double>(s.failures) / static_cast<double>(trials);
  s.ci99 = ci99_halfwidth(s.rate, trials);
  return s;
}

MonteCarloSummary monte_carlo_reward_game(std::int64_t n_members, double q_network, double q_contract,
                                          std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (n_members < 1) throw std::invalid_argument("need at least one member");
  if (!(q_network >= 0.0 && q_network <= 1.0) || !(q_contract >= 0.0 && q_contract <= 1.0)) {
    throw std::invalid_argument("response probabilities must lie in [0, 1]");
  }
  MonteCarloSummary s;
  s.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, t));
    bool network = false;
    bool contract = false;
    for (std::int64_t i = 0; i < n_members; ++i) network = rng.bernoulli(q_network) || network;
    for (std::int64_t i = 0; i < n_members; ++i) contract = rng.bernoulli(q_contract) || contract;
    if (!network) {
      ++s.queries;
      if (!contract) ++s.failures;
    }
  }
  s.rate = static_cast<double>(s.failures) / static_cast<double>(trials);
  s.ci99 = ci99_halfwidth(s.rate, trials);
  return s;
}

std::vector<NodeStrategy> bribed_committee_profile(const ProtocolParams& params) {
  require_valid(params);
  std::vector<NodeStrategy> nodes(static_cast<std::size_t>(params.n_nodes), strategy::Byzantine{});
  for (std::int64_t i = 0; i < params.honest_count(); ++i) {
    if (i < params.committee_size()) {
      nodes[static_cast<std::size_t>(i)] = strategy::BribedWithhold{0};
    } else {
      nodes[static_cast<std::size_t>(i)] = strategy::PlaceOnly{};
    }
  }
  return nodes;
}

std::vector<NodeStrategy> honest_profile(const ProtocolParams& params) {
  require_valid(params);
  std::vector<NodeStrategy> nodes(static_cast<std::size_t>(params.n_nodes), strategy::Byzantine{});
  for (std::int64_t i = 0; i < params.honest_count(); ++i) nodes[static_cast<std::size_t>(i)] = strategy::Honest{};
  return nodes;
}

std::pair<double, double> single_stage_bribed_utility(const GameConfig& config, double q) {
  const ProtocolParams& p = config.params;
  const Coin bribe = config.adversary.node_budget / static_cast<double>(p.committee_size());
  const double u_withhold = utility(config.utility, bribe - p.stake);
  const double u_place = utility(config.utility, bribe - p.clue_cost);
  return {q * u_withhold + (1.0 - q) * u_place, std::abs(u_withhold - u_place) * std::sqrt(q * (1.0 - q))};
}

nlohmann::ordered_json RepeatedGameResult::summary_json() const {
  std::size_t failures = 0;
  std::size_t defections = 0;
  for (const auto& r : rounds) {
    failures += r.failure ? 1 : 0;
    defections += r.defections;
  }
  double discounted = 0.0;
  for (double v : discounted_utility) discounted += v;
  if (!discounted_utility.empty()) discounted /= static_cast<double>(discounted_utility.size());
  return nlohmann::ordered_json{{"rounds", rounds.size()},
                                {"bribed_nodes", bribed_nodes.size()},
                                {"bribe_per_node", bribe_per_node},
                                {"failures", failures},
                                {"defections", defections},
                                {"mean_average_utility", mean_average_utility},
                                {"mean_discounted_utility", discounted},
                                {"single_stage_expected", single_stage_expected},
                                {"single_stage_sigma", single_stage_sigma}};
}

RepeatedGameResult run_repeated_game(const GameConfig& config, const RepeatedGameConfig& rg, std::uint64_t seed) {
  const ProtocolParams& p = config.params;
  require_valid(p);
  if (!(rg.discount > 0.0 && rg.discount < 1.0)) throw std::invalid_argument("discount must lie in (0, 1)");
  if (!(rg.coin_withhold_prob >= 0.0 && rg.coin_withhold_prob <= 1.0)) {
    throw std::invalid_argument("coin probability must lie in [0, 1]");
  }
  const auto n = static_cast<std::size_t>(p.n_nodes);
  const auto honest = static_cast<std::size_t>(p.honest_count());
  const auto m = static_cast<std::size_t>(p.committee_size());
  for (const auto& [node, round] : rg.injected_defections) {
    if (node >= m) throw std::invalid_argument("injected defection must target a bribed node");
    if (round < 1) throw std::invalid_argument("rounds are numbered from 1");
  }

  RepeatedGameResult res;
  res.bribe_per_node = config.adversary.node_budget / static_cast<double>(m);
  for (std::size_t j = 0; j < m; ++j) res.bribed_nodes.push_back(j);
  res.discounted_utility.assign(m, 0.0);
  res.average_utility.assign(m, 0.0);
  std::tie(res.single_stage_expected, res.single_stage_sigma) =
      single_stage_bribed_utility(config, rg.coin_withhold_prob);

  std::vector<bool> cut_off(m, false);
  bool adversary_trusted = true;
  double weight = 1.0;
  for (std::size_t round = 1; round <= rg.rounds; ++round) {
    Rng rng(derive_seed(seed, round));
    RoundRecord rec;
    rec.round = round;
    rec.coin_withhold = rng.bernoulli(rg.coin_withhold_prob);
    if (rg.bribe_until_round && round > *rg.bribe_until_round) adversary_trusted = false;
    rec.bribes_offered = adversary_trusted;

    ActionVector placed(n);
    for (std::size_t i = m; i < honest; ++i) placed.set(i, true);
    std::vector<bool> cooperating(m);
    std::vector<bool> defected(m, false);
    for (std::size_t j = 0; j < m; ++j) {
      cooperating[j] = rec.bribes_offered && !cut_off[j];
      const bool instructed_withhold = cooperating[j] && rec.coin_withhold;
      bool withhold = instructed_withhold;
      const bool injected = std::find(rg.injected_defections.begin(), rg.injected_defections.end(),
                                      std::pair{j, round}) != rg.injected_defections.end();
      if (injected) withhold = !withhold;
      defected[j] = cooperating[j] && withhold != instructed_withhold;
      placed.set(j, !withhold);
    }
    rec.failure = static_cast<std::int64_t>(placed.count()) < p.threshold_k;
    const PayoffReport slashed = slash(config.slashing, p, placed);

    rec.bribe_income.assign(m, 0.0);
    rec.utilities.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      if (defected[j]) {
        ++rec.defections;
        if (rg.grim_trigger) cut_off[j] = true;
      } else if (cooperating[j]) {
        rec.bribe_income[j] = res.bribe_per_node;
      }
      const Coin payoff = (placed[j] ? -p.clue_cost : 0.0) + slashed.node_payoffs[j] + rec.bribe_income[j];
      rec.utilities[j] = utility(config.utility, payoff);
      res.discounted_utility[j] += weight * rec.utilities[j];
      res.average_utility[j] += rec.utilities[j];
    }
    weight *= rg.discount;
    res.rounds.push_back(std::move(rec));
  }
  if (rg.rounds > 0) {
    for (auto& a : res.average_utility) a /= static_cast<double>(rg.rounds);
  }
  for (double a : res.average_utility) res.mean_average_utility += a;
  res.mean_average_utility /= static_cast<double>(m);
  return res;
}

nlohmann::ordered_json DeviationGain::to_json() const {
  return nlohmann::ordered_json{
      {"participant", participant}, {"deviation", deviation}, {"gain", gain}, {"ci99", ci99}};
}

std::vector<DeviationGain> DeviationReport::max_per_participant() const {
  std::vector<DeviationGain> out;
  for (const auto& g : gains) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& o) { return o.participant == g.participant; });
    if (it == out.end()) {
      out.push_back(g);
    } else if (g.gain > it->gain) {
      *it = g;
    }
  }
  return out;
}

bool DeviationReport::equilibrium() const {
  return std::none_of(gains.begin(), gains.end(), [](const auto& g) { return g.profitable(); });
}

DeviationReport check_no_profitable_deviation(const GameConfig& config, const std::vector<NodeStrategy>& nodes,
                                              ClientStrategy client, std::size_t trials, std::uint64_t seed) {
  validate_profile(config, nodes);
  if (nodes.size() > kMaxDeviationNodes) throw std::invalid_argument("deviation check supports at most 10 nodes");
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");

  const UtilitySpec client_utility{config.utility.nu, 0.0};
  std::vector<std::pair<std::string, Deviation>> candidates;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (is_byzantine(nodes[i])) continue;
    candidates.push_back({node_name(i), {Deviation::Kind::FlipReply, i}});
    candidates.push_back({node_name(i), {Deviation::Kind::FlipPlace, i}});
  }
  candidates.push_back({"client", {Deviation::Kind::FlipQuery, 0}});

  GameOptions base_options;
  base_options.record_transcript = false;
  std::vector<GameOutcome> baseline;
  baseline.reserve(trials);
  GameConfig cfg = config;
  for (std::size_t t = 0; t < trials; ++t) {
    cfg.rng_seed = derive_seed(seed, t);
    baseline.push_back(run_game(cfg, nodes, client, base_options));
  }

  DeviationReport report;
  for (const auto& [who, dev] : candidates) {
    GameOptions options = base_options;
    options.deviation = dev;
    Moments diff;
    for (std::size_t t = 0; t < trials; ++t) {
      cfg.rng_seed = derive_seed(seed, t);
      const GameOutcome o = run_game(cfg, nodes, client, options);
      const GameOutcome& b = baseline[t];
      if (dev.kind == Deviation::Kind::FlipQuery) {
        diff.add(utility(client_utility, o.client_net_payoff) - utility(client_utility, b.client_net_payoff));
      } else {
        diff.add(utility(config.utility, o.node_net_payoffs[dev.node]) -
                 utility(config.utility, b.node_net_payoffs[dev.node]));
      }
    }
    report.gains.push_back({who, to_string(dev.kind), diff.mean(trials), diff.ci99(trials)});
  }
  return report;
}

}  // namespace dac
