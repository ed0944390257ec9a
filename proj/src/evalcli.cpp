#include "dac/evalcli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "dac/contract.hpp"
#include "dac/equilibrium.hpp"
#include "dac/game_sim.hpp"
#include "dac/json_io.hpp"
#include "dac/reward.hpp"

namespace dac {

SweepSpec SweepSpec::defaults(std::size_t points, std::int64_t n_max) {
  SweepSpec s;
  s.n_values = log_spaced_counts(1, n_max, points);
  return s;
}

void SweepSpec::require_valid() const {
  if (n_values.empty()) throw std::invalid_argument("sweep needs at least one node count");
  if (nu_values.empty()) throw std::invalid_argument("sweep needs at least one nu");
  if (!(epsilon_target > 0.0 && epsilon_target < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  for (auto n : n_values) {
    if (n < 1) throw std::invalid_argument("node counts must be positive");
  }
  for (double nu : nu_values) {
    if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("nu must lie in (0, 1]");
  }
  if (!(stake > clue_cost && clue_cost >= 0.0)) throw std::invalid_argument("need p_s > p_w >= 0");
}

std::vector<std::int64_t> log_spaced_counts(std::int64_t lo, std::int64_t hi, std::size_t points) {
  if (lo < 1 || hi < lo) throw std::invalid_argument("need 1 <= lo <= hi");
  if (points == 0) throw std::invalid_argument("need at least one point");
  if (points == 1) return {hi};
  std::vector<std::int64_t> out;
  const double a = std::log(static_cast<double>(lo));
  const double b = std::log(static_cast<double>(hi));
  for (std::size_t i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(points - 1);
    auto v = static_cast<std::int64_t>(std::llround(std::exp(a + t * (b - a))));
    v = std::clamp(v, lo, hi);
    if (out.empty() || out.back() != v) out.push_back(v);
  }
  out.back() = hi;
  return out;
}

std::int64_t sweep_committee(std::int64_t n) { return std::max<std::int64_t>(1, n / 3); }

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.require_valid();
  std::vector<SweepRow> rows;
  for (double nu : spec.nu_values) {
    for (auto n : spec.n_values) {
      const BribeModel model{sweep_committee(n), spec.stake, spec.clue_cost};
      const BribeBounds b = min_bribe_for_failure(model, nu, spec.epsilon_target);
      rows.push_back({n, nu, spec.epsilon_target, b.p0_min, b.p0_max, b.p0_min * spec.eth_usd_rate,
                      b.p0_max * spec.eth_usd_rate});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const SweepRow& x, const SweepRow& y) {
    return x.nu != y.nu ? x.nu < y.nu : x.n_nodes < y.n_nodes;
  });
  return rows;
}

std::string format_sig6(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
  return std::string(buf, res.ptr);
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
  os << kSweepHeader << '\n';
  for (const auto& r : rows) {
    os << r.n_nodes << ',' << format_sig6(r.nu) << ',' << format_sig6(r.epsilon_target) << ','
       << format_sig6(r.p0_lower_eth) << ',' << format_sig6(r.p0_upper_eth) << ',' << format_sig6(r.p0_lower_usd)
       << ',' << format_sig6(r.p0_upper_usd) << '\n';
  }
}

std::vector<BoundsRow> compute_bounds(const ProtocolParams& params, const std::vector<double>& nu_values,
                                      double epsilon_target, double rate) {
  std::vector<BoundsRow> rows;
  for (double nu : nu_values) {
    const BribeBounds b = min_bribe_for_failure(params, nu, epsilon_target);
    rows.push_back({nu, b.p0_min, b.p0_max, b.p0_min * rate, b.p0_max * rate, b.saturated});
  }
  return rows;
}

namespace {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Keys accepted in a config file besides the model fields.
const std::set<std::string> kExtraConfigFields = {"nu_values", "epsilon_target", "eth_usd_rate", "seed",
                                                  "points",    "n_max",          "trials",       "rounds",
                                                  "q",         "discount",       "punishment"};

ProtocolParams small_instance_params() {
  ProtocolParams p;
  p.n_nodes = 7;
  p.n_byzantine = 2;
  p.threshold_k = 3;
  p.stake = 2.0;
  p.clue_cost = 0.1;
  p.query_cost = 0.05;
  p.client_value = 10.0;
  p.compensation = 1.0;
  p.epsilon_slash = 0.01;
  return p;
}

struct Config {
  nlohmann::json doc = nlohmann::json::object();
  std::string text;
  std::string origin;

  bool has(const std::string& name) const { return doc.contains(name); }

  std::string where(const std::string& name) const {
    const auto pos = text.find('"' + name + '"');
    if (pos == std::string::npos) return origin;
    return origin + ":" + std::to_string(1 + std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
  }

  [[noreturn]] void fail(const std::string& name, const std::string& what) const {
    throw ConfigError(where(name) + ": field '" + name + "': " + what);
  }

  double number(const std::string& name, double fallback) const {
    if (!has(name)) return fallback;
    if (!doc[name].is_number()) fail(name, "expected a number");
    return doc[name].get<double>();
  }

  std::uint64_t count(const std::string& name, std::uint64_t fallback) const {
    if (!has(name)) return fallback;
    if (!doc[name].is_number_unsigned()) fail(name, "expected a non-negative integer");
    return doc[name].get<std::uint64_t>();
  }

  std::vector<double> numbers(const std::string& name, std::vector<double> fallback) const {
    if (!has(name)) return fallback;
    const auto& v = doc[name];
    if (!v.is_array() || v.empty()) fail(name, "expected a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(name, "expected a non-empty array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  ModelConfig model(ModelConfig base) const {
    try {
      return model_from_json(doc, base);
    } catch (const ConfigError& e) {
      // Messages look like "field 'name': ..."; prefix the location of that field.
      const std::string msg = e.what();
      const auto open = msg.find('\'');
      const auto close = open == std::string::npos ? open : msg.find('\'', open + 1);
      if (close == std::string::npos) throw ConfigError(origin + ": " + msg);
      throw ConfigError(where(msg.substr(open + 1, close - open - 1)) + ": " + msg);
    }
  }
};

Config load_config(const std::string& path) {
  Config c;
  if (path.empty()) return c;
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot read config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  c.text = ss.str();
  c.origin = path;
  c.doc = parse_json_text(c.text, path);
  if (!c.doc.is_object()) throw ConfigError(path + ": config must be a JSON object");
  for (const auto& [key, value] : c.doc.items()) {
    const bool model_field =
        std::any_of(std::begin(kModelFields), std::end(kModelFields), [&](const char* f) { return key == f; });
    if (!model_field && !kExtraConfigFields.count(key)) c.fail(key, "unknown field");
  }
  return c;
}

std::string dump(const nlohmann::ordered_json& j) { return j.dump(); }

// Model flags shared by the subcommands that play the game.
struct ModelFlags {
  std::int64_t n = 0;
  std::int64_t f = 0;
  std::int64_t k = 0;
  double p0 = 0.0;
  double p1 = 0.0;
  double nu = 1.0;
  CLI::Option* n_opt = nullptr;
  CLI::Option* f_opt = nullptr;
  CLI::Option* k_opt = nullptr;
  CLI::Option* p0_opt = nullptr;
  CLI::Option* p1_opt = nullptr;
  CLI::Option* nu_opt = nullptr;

  void attach(CLI::App* app, bool with_nu = true) {
    n_opt = app->add_option("--n", n, "number of nodes N");
    f_opt = app->add_option("--f", f, "number of Byzantine nodes");
    k_opt = app->add_option("--k", k, "reconstruction threshold");
    p0_opt = app->add_option("--p0", p0, "adversary budget for node bribes (ETH)");
    p1_opt = app->add_option("--p1", p1, "adversary bribe to the client (ETH)");
    if (with_nu) nu_opt = app->add_option("--nu", nu, "risk exponent in (0, 1]");
  }

  ModelConfig apply(ModelConfig m) const {
    if (n_opt && n_opt->count()) m.params.n_nodes = n;
    if (f_opt && f_opt->count()) m.params.n_byzantine = f;
    if (k_opt && k_opt->count()) m.params.threshold_k = k;
    if (p0_opt && p0_opt->count()) m.adversary.node_budget = p0;
    if (p1_opt && p1_opt->count()) m.adversary.client_bribe = p1;
    if (nu_opt && nu_opt->count()) m.nu = nu;
    if (!(m.nu > 0.0 && m.nu <= 1.0)) throw UsageError("nu must lie in (0, 1]");
    if (m.adversary.node_budget < 0.0 || m.adversary.client_bribe < 0.0) {
      throw UsageError("bribe budgets must be non-negative");
    }
    const auto violations = validate(m.params);
    if (!violations.empty()) {
      std::string msg = "invalid parameters:";
      for (const auto& v : violations) msg += " " + v + ";";
      throw UsageError(msg);
    }
    return m;
  }
};

struct Globals {
  std::string config_path;
  std::uint64_t seed = 1;
  std::string output;
  double rate = kDefaultEthUsdRate;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* rate_opt = nullptr;
};

// ---- bounds ----

struct BoundsArgs {
  ModelFlags model;
  std::vector<double> nu_values;
  double epsilon = 1e-3;
  CLI::Option* nu_opt = nullptr;
  CLI::Option* eps_opt = nullptr;
};

int cmd_bounds(const BoundsArgs& a, const Config& cfg, double rate, std::ostream& os) {
  ModelConfig base;
  base.params = ethereum_reference_params();
  const ModelConfig m = a.model.apply(cfg.model(base));
  std::vector<double> nus = cfg.numbers("nu_values", {1.0, 0.8, 0.5, 0.1});
  if (a.nu_opt->count()) nus = a.nu_values;
  const double eps = a.eps_opt->count() ? a.epsilon : cfg.number("epsilon_target", a.epsilon);
  for (const auto& r : compute_bounds(m.params, nus, eps, rate)) {
    os << dump({{"nu", r.nu},
                {"epsilon_target", eps},
                {"p0_min_eth", r.p0_min_eth},
                {"p0_max_eth", r.p0_max_eth},
                {"p0_min_usd", r.p0_min_usd},
                {"p0_max_usd", r.p0_max_usd},
                {"saturated", r.saturated}})
       << '\n';
  }
  return kExitOk;
}

// ---- sweep ----

struct SweepArgs {
  std::size_t points = 200;
  std::int64_t n_max = 300000;
  std::vector<double> nu_values;
  double epsilon = 1e-6;
  CLI::Option* points_opt = nullptr;
  CLI::Option* n_max_opt = nullptr;
  CLI::Option* nu_opt = nullptr;
  CLI::Option* eps_opt = nullptr;
};

int cmd_sweep(const SweepArgs& a, const Config& cfg, double rate, std::ostream& os) {
  const ModelConfig m = cfg.model({ethereum_reference_params(), {}, 1.0});
  const auto points = a.points_opt->count() ? a.points : static_cast<std::size_t>(cfg.count("points", a.points));
  const auto n_max = a.n_max_opt->count() ? a.n_max : static_cast<std::int64_t>(cfg.count("n_max", 300000));
  if (points < 1) throw UsageError("--points must be at least 1");
  if (n_max < 1) throw UsageError("--n-max must be at least 1");
  SweepSpec spec = SweepSpec::defaults(points, n_max);
  spec.nu_values = a.nu_opt->count() ? a.nu_values : cfg.numbers("nu_values", spec.nu_values);
  spec.epsilon_target = a.eps_opt->count() ? a.epsilon : cfg.number("epsilon_target", spec.epsilon_target);
  spec.eth_usd_rate = rate;
  spec.stake = m.params.stake;
  spec.clue_cost = m.params.clue_cost;
  try {
    spec.require_valid();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  write_sweep_csv(run_sweep(spec), os);
  return kExitOk;
}

// ---- simulate ----

struct SimulateArgs {
  ModelFlags model;
  std::string scenario = "thm-security-two";
  double q = 0.0;
  std::size_t trials = 100000;
  double punishment = 0.0;
  bool transcript = false;
  CLI::Option* q_opt = nullptr;
  CLI::Option* trials_opt = nullptr;
  CLI::Option* punishment_opt = nullptr;
};

int cmd_simulate(const SimulateArgs& a, const Config& cfg, std::uint64_t seed, std::ostream& os) {
  const ModelConfig m = a.model.apply(cfg.model({small_instance_params(), {}, 1.0}));
  const std::size_t trials = a.trials_opt->count() ? a.trials : cfg.count("trials", a.trials);
  if (trials < 1) throw UsageError("--trials must be at least 1");

  GameConfig game{m.params, m.adversary, m.node_utility(), OptimalSlashing{}, {}, seed};
  std::vector<NodeStrategy> nodes;
  ClientStrategy client = ClientStrategy::Honest;
  double expected = 0.0;
  bool require_no_queries = false;

  if (a.scenario == "thm-security-two") {
    const double q = a.q_opt->count() ? a.q : cfg.number("q", q_star_risk_neutral(m.params, m.adversary.node_budget).value);
    if (!(q >= 0.0 && q <= 1.0)) throw UsageError("--q must lie in [0, 1]");
    nodes = bribed_committee_profile(m.params);
    game.coins = {q};
    client = ClientStrategy::AlwaysQuery;
    expected = q;
  } else if (a.scenario == "free-rider") {
    const Coin b =
        a.punishment_opt->count() ? a.punishment : cfg.number("punishment", 0.5 * m.params.clue_cost);
    if (b < 0.0) throw UsageError("--punishment must be non-negative");
    const FreeRiderEquilibrium eq = solve_free_rider(m.params, b, game.utility);
    nodes = honest_profile(m.params);
    for (auto& s : nodes) {
      if (std::holds_alternative<strategy::Honest>(s)) s = strategy::FreeRider{eq.r_star};
    }
    game.slashing = CustomPunishment{b};
    client = ClientStrategy::AlwaysQuery;
    expected = eq.failure;
  } else if (a.scenario == "honest" || a.scenario == "contract-not-used") {
    nodes = honest_profile(m.params);
    require_no_queries = a.scenario == "contract-not-used";
  } else if (a.scenario == "forced-withhold") {
    nodes = honest_profile(m.params);
    for (auto& s : nodes) {
      if (std::holds_alternative<strategy::Honest>(s)) s = strategy::BribedWithhold{0};
    }
    game.coins = {1.0};
    expected = 1.0;
  } else {
    throw UsageError("unknown scenario '" + a.scenario +
                     "' (thm-security-two, free-rider, honest, contract-not-used, forced-withhold)");
  }

  if (a.transcript) {
    const GameOutcome o = run_game(game, nodes, client);
    for (const auto& e : o.transcript) os << dump(e.to_json()) << '\n';
    return kExitOk;
  }

  const MonteCarloSummary s = monte_carlo_failure(game, nodes, client, trials, seed);
  const bool ok = s.within_3_sigma(expected) && (!require_no_queries || s.queries == 0);
  nlohmann::ordered_json j{{"scenario", a.scenario}};
  const nlohmann::ordered_json summary = s.to_json();
  for (auto it = summary.begin(); it != summary.end(); ++it) j[it.key()] = it.value();
  j["expected_rate"] = expected;
  j["queries"] = s.queries;
  j["within_3_sigma"] = ok;
  os << dump(j) << '\n';
  return ok ? kExitOk : kExitCheckFailed;
}

// ---- axioms ----

struct AxiomsArgs {
  std::int64_t n = 6;
  std::int64_t k = 2;
  std::string mode = "exhaustive";
  std::size_t trials = 10000;
  double punishment = 0.0;
  double bound = 0.0;
  CLI::Option* punishment_opt = nullptr;
  CLI::Option* bound_opt = nullptr;
  CLI::Option* f_opt = nullptr;
  std::int64_t f = 0;
};

int cmd_axioms(const AxiomsArgs& a, const Config& cfg, std::uint64_t seed, std::ostream& os) {
  ProtocolParams base = small_instance_params();
  base.n_byzantine = 0;
  ModelConfig m = cfg.model({base, {}, 1.0});
  m.params.n_nodes = a.n;
  m.params.threshold_k = a.k;
  if (a.f_opt->count()) m.params.n_byzantine = a.f;
  const auto violations = validate(m.params);
  if (!violations.empty()) throw UsageError("invalid parameters: " + violations.front());

  CheckMode mode;
  if (a.mode == "exhaustive") {
    if (a.n > static_cast<std::int64_t>(kMaxExhaustiveNodes)) throw UsageError("exhaustive mode needs --n <= 12");
    mode = CheckMode::exhaustive();
  } else if (a.mode == "sampled") {
    mode = CheckMode::sampled(a.trials, seed);
  } else {
    throw UsageError("--mode must be exhaustive or sampled");
  }

  SlashingFunction fn = OptimalSlashing{};
  if (a.punishment_opt->count()) {
    if (a.punishment < 0.0) throw UsageError("--punishment must be non-negative");
    fn = CustomPunishment{a.punishment};
  }
  const Coin bound = a.bound_opt->count() ? a.bound : safe_idle_penalty(fn, m.params);
  const SlashEvaluator eval = make_evaluator(fn, m.params);
  const auto n = static_cast<std::size_t>(a.n);
  const AxiomCheckResult results[] = {
      check_symmetry(eval, n, mode), check_no_reward(eval, n, mode),
      check_minimal_punishment(eval, n, static_cast<std::size_t>(a.k), bound, mode)};
  bool all = true;
  for (const auto& r : results) {
    os << dump(r.to_json()) << '\n';
    all = all && r.passed;
  }
  return all ? kExitOk : kExitCheckFailed;
}

// ---- reward ----

struct RewardArgs {
  std::string variant = "lemma3";
  std::int64_t n = 2;
  double pw = 1.0;
  double ps = 0.5;
  double pb = 0.0;
  double t = 0.0;
  std::vector<double> schedule;
};

int cmd_reward(const RewardArgs& a, std::ostream& os) {
  if (a.n < 2) throw UsageError("--n must be at least 2");
  RewardSchedule schedule = RewardSchedule::constant(a.n, a.t);
  if (!a.schedule.empty()) schedule.per_count = a.schedule;
  try {
    const RewardEquilibrium eq = a.variant == "lemma3"   ? solve_reward_equilibrium(a.n, a.pw, a.ps, schedule)
                                 : a.variant == "lemma4" ? solve_reward_equilibrium_bribed(a.n, a.pw, a.ps, a.pb, schedule)
                                                         : throw UsageError("--variant must be lemma3 or lemma4");
    os << dump(eq.to_json()) << '\n';
  } catch (const NoEquilibrium& e) {
    os << dump({{"variant", a.variant}, {"equilibrium", false}, {"reason", e.what()}}) << '\n';
  }
  return kExitOk;
}

// ---- game ----

struct GameArgs {
  ModelFlags model;
  std::string mode = "repeated";
  std::size_t rounds = 10000;
  double q = 0.0;
  double discount = 0.9;
  bool no_grim = false;
  std::size_t bribe_until = 0;
  std::vector<std::string> defections;
  bool per_round = false;
  std::string profile = "honest";
  std::size_t trials = 10000;
  CLI::Option* q_opt = nullptr;
  CLI::Option* rounds_opt = nullptr;
  CLI::Option* discount_opt = nullptr;
  CLI::Option* bribe_until_opt = nullptr;
  CLI::Option* trials_opt = nullptr;
};

std::pair<std::size_t, std::size_t> parse_defection(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw UsageError("--defect expects NODE:ROUND, got '" + s + "'");
  try {
    return {std::stoull(s.substr(0, colon)), std::stoull(s.substr(colon + 1))};
  } catch (const std::exception&) {
    throw UsageError("--defect expects NODE:ROUND, got '" + s + "'");
  }
}

int cmd_game(const GameArgs& a, const Config& cfg, std::uint64_t seed, std::ostream& os) {
  ModelConfig base{small_instance_params(), {}, 1.0};
  // Default budget buys withholding with probability 0.2.
  base.adversary.node_budget = 0.2 * base.params.strong_adversary_threshold();
  const ModelConfig m = a.model.apply(cfg.model(base));
  GameConfig game{m.params, m.adversary, m.node_utility(), OptimalSlashing{}, {}, seed};
  const double q_default = q_star_risk_neutral(m.params, m.adversary.node_budget).value;
  const double q = a.q_opt->count() ? a.q : cfg.number("q", q_default);
  if (!(q >= 0.0 && q <= 1.0)) throw UsageError("--q must lie in [0, 1]");

  if (a.mode == "repeated") {
    RepeatedGameConfig rg;
    rg.rounds = a.rounds_opt->count() ? a.rounds : cfg.count("rounds", a.rounds);
    rg.discount = a.discount_opt->count() ? a.discount : cfg.number("discount", a.discount);
    rg.coin_withhold_prob = q;
    rg.grim_trigger = !a.no_grim;
    if (a.bribe_until_opt->count()) rg.bribe_until_round = a.bribe_until;
    for (const auto& d : a.defections) rg.injected_defections.push_back(parse_defection(d));
    if (!(rg.discount > 0.0 && rg.discount < 1.0)) throw UsageError("--discount must lie in (0, 1)");
    if (rg.rounds < 1) throw UsageError("--rounds must be at least 1");

    const RepeatedGameResult res = run_repeated_game(game, rg, seed);
    if (a.per_round) {
      for (const auto& r : res.rounds) {
        os << dump({{"round", r.round},
                    {"coin", r.coin_withhold ? 0 : 1},
                    {"bribes_offered", r.bribes_offered},
                    {"defections", r.defections},
                    {"failure", r.failure},
                    {"bribe_income", r.bribe_income},
                    {"utilities", r.utilities}})
           << '\n';
      }
    }
    nlohmann::ordered_json j = res.summary_json();
    const bool perturbed = rg.bribe_until_round.has_value() || !rg.injected_defections.empty();
    const double band = 3.0 * res.single_stage_sigma / std::sqrt(static_cast<double>(rg.rounds));
    const bool ok = perturbed || std::abs(res.mean_average_utility - res.single_stage_expected) <= band;
    j["coin_withhold_prob"] = q;
    j["within_3_sigma"] = ok;
    os << dump(j) << '\n';
    return ok ? kExitOk : kExitCheckFailed;
  }

  if (a.mode == "deviations") {
    if (m.params.n_nodes > static_cast<std::int64_t>(kMaxDeviationNodes)) throw UsageError("deviation check needs N <= 10");
    const std::size_t trials = a.trials_opt->count() ? a.trials : cfg.count("trials", a.trials);
    if (trials < 1) throw UsageError("--trials must be at least 1");
    std::vector<NodeStrategy> nodes;
    ClientStrategy client = ClientStrategy::Honest;
    if (a.profile == "honest") {
      nodes = honest_profile(m.params);
    } else if (a.profile == "bribed") {
      nodes = bribed_committee_profile(m.params);
      game.coins = {q};
      client = ClientStrategy::AlwaysQuery;
    } else {
      throw UsageError("--profile must be honest or bribed");
    }
    const DeviationReport report = check_no_profitable_deviation(game, nodes, client, trials, seed);
    for (const auto& g : report.gains) os << dump(g.to_json()) << '\n';
    os << dump({{"profile", a.profile}, {"trials", trials}, {"equilibrium", report.equilibrium()}}) << '\n';
    return report.equilibrium() ? kExitOk : kExitCheckFailed;
  }
  throw UsageError("--mode must be repeated or deviations");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Incentive analysis of a slashing contract for data availability committees", "dac"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "JSON config file (falls back to $DAC_CONFIG)");
  g.seed_opt = app.add_option("--seed", g.seed, "RNG seed for simulations");
  app.add_option("--output", g.output, "write results to this file instead of stdout");
  g.rate_opt = app.add_option("--eth-usd-rate", g.rate, "USD per ETH for display columns");

  BoundsArgs bounds;
  auto* bounds_cmd = app.add_subcommand("bounds", "minimum bribe range for a target failure probability");
  bounds.model.attach(bounds_cmd, false);
  bounds.nu_opt = bounds_cmd->add_option("--nu", bounds.nu_values, "risk exponents")->delimiter(',');
  bounds.eps_opt = bounds_cmd->add_option("--epsilon", bounds.epsilon, "target failure probability");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "CSV of bribe bounds over a log-spaced range of N");
  sweep.points_opt = sweep_cmd->add_option("--points", sweep.points, "number of N values");
  sweep.n_max_opt = sweep_cmd->add_option("--n-max", sweep.n_max, "largest N");
  sweep.nu_opt = sweep_cmd->add_option("--nu", sweep.nu_values, "risk exponents")->delimiter(',');
  sweep.eps_opt = sweep_cmd->add_option("--epsilon", sweep.epsilon, "target failure probability");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo failure rate of a strategy profile");
  sim.model.attach(sim_cmd);
  sim_cmd->add_option("--scenario", sim.scenario,
                      "thm-security-two | free-rider | honest | contract-not-used | forced-withhold");
  sim.q_opt = sim_cmd->add_option("--q", sim.q, "shared coin withhold probability");
  sim.trials_opt = sim_cmd->add_option("--trials", sim.trials, "number of games");
  sim.punishment_opt = sim_cmd->add_option("--punishment", sim.punishment, "idle penalty B for free-rider");
  sim_cmd->add_flag("--transcript", sim.transcript, "print the event transcript of one game");

  AxiomsArgs ax;
  auto* ax_cmd = app.add_subcommand("axioms", "check symmetry, no reward and minimal punishment");
  ax_cmd->add_option("--n", ax.n, "number of nodes");
  ax_cmd->add_option("--k", ax.k, "reconstruction threshold");
  ax.f_opt = ax_cmd->add_option("--f", ax.f, "number of Byzantine nodes");
  ax_cmd->add_option("--mode", ax.mode, "exhaustive | sampled");
  ax_cmd->add_option("--trials", ax.trials, "vectors to draw in sampled mode");
  ax.punishment_opt = ax_cmd->add_option("--punishment", ax.punishment, "check CustomPunishment(B) instead");
  ax.bound_opt = ax_cmd->add_option("--bound", ax.bound, "minimal-punishment bound");

  RewardArgs rw;
  auto* rw_cmd = app.add_subcommand("reward", "mixed equilibrium under a contract reward scheme");
  rw_cmd->add_option("--variant", rw.variant, "lemma3 | lemma4");
  rw_cmd->add_option("--n", rw.n, "committee members");
  rw_cmd->add_option("--pw", rw.pw, "clue cost");
  rw_cmd->add_option("--ps", rw.ps, "stake");
  rw_cmd->add_option("--pb", rw.pb, "per-member bribe (lemma4)");
  rw_cmd->add_option("--t", rw.t, "reward budget T");
  rw_cmd->add_option("--schedule", rw.schedule, "T_1..T_N (default: all equal to T)")->delimiter(',');

  GameArgs gm;
  auto* gm_cmd = app.add_subcommand("game", "repeated game or deviation check");
  gm.model.attach(gm_cmd);
  gm_cmd->add_option("--mode", gm.mode, "repeated | deviations");
  gm.rounds_opt = gm_cmd->add_option("--rounds", gm.rounds, "rounds of the repeated game");
  gm.q_opt = gm_cmd->add_option("--q", gm.q, "shared coin withhold probability");
  gm.discount_opt = gm_cmd->add_option("--discount", gm.discount, "discount factor in (0, 1)");
  gm_cmd->add_flag("--no-grim", gm.no_grim, "keep bribing defectors");
  gm.bribe_until_opt = gm_cmd->add_option("--bribe-until", gm.bribe_until, "last round with a bribe offer");
  gm_cmd->add_option("--defect", gm.defections, "inject a defection, NODE:ROUND");
  gm_cmd->add_flag("--per-round", gm.per_round, "print one record per round");
  gm_cmd->add_option("--profile", gm.profile, "honest | bribed (deviations mode)");
  gm.trials_opt = gm_cmd->add_option("--trials", gm.trials, "paired games per deviation");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::ostringstream buf;
  int code = kExitOk;
  try {
    std::string path = g.config_path;
    if (path.empty()) {
      if (const char* env = std::getenv("DAC_CONFIG")) path = env;
    }
    const Config cfg = load_config(path);
    const std::uint64_t seed = g.seed_opt->count() ? g.seed : cfg.count("seed", g.seed);
    const double rate = g.rate_opt->count() ? g.rate : cfg.number("eth_usd_rate", g.rate);
    if (!(rate > 0.0)) throw UsageError("--eth-usd-rate must be positive");

    const std::string name = sub->get_name();
    if (name == "bounds") code = cmd_bounds(bounds, cfg, rate, buf);
    else if (name == "sweep") code = cmd_sweep(sweep, cfg, rate, buf);
    else if (name == "simulate") code = cmd_simulate(sim, cfg, seed, buf);
    else if (name == "axioms") code = cmd_axioms(ax, cfg, seed, buf);
    else if (name == "reward") code = cmd_reward(rw, buf);
    else code = cmd_game(gm, cfg, seed, buf);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n' << sub->help();
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n' << sub->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }

  if (g.output.empty()) {
    out << buf.str();
  } else {
    std::ofstream file(g.output, std::ios::binary);
    if (!file || !(file << buf.str()) || !file.flush()) {
      err << "error: cannot write " << g.output << '\n';
      return kExitCheckFailed;
    }
  }
  return code;
}

}  // namespace dac
