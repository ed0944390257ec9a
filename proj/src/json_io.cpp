#include "dac/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dac {
namespace {

double number_field(const nlohmann::json& j, const char* name, double fallback) {
  auto it = j.find(name);
  if (it == j.end()) return fallback;
  if (!it->is_number()) {
    throw ConfigError(std::string("field '") + name + "': expected a number");
  }
  return it->get<double>();
}

std::int64_t count_field(const nlohmann::json& j, const char* name, std::int64_t fallback) {
  auto it = j.find(name);
  if (it == j.end()) return fallback;
  if (it->is_number_integer()) return it->get<std::int64_t>();
  if (it->is_number_float()) {
    const double v = it->get<double>();
    if (std::floor(v) == v) return static_cast<std::int64_t>(v);
  }
  throw ConfigError(std::string("field '") + name + "': expected an integer count");
}

}  // namespace

nlohmann::json to_json(const ModelConfig& c) {
  const auto& p = c.params;
  return nlohmann::json{{"n_nodes", p.n_nodes},
                        {"n_byzantine", p.n_byzantine},
                        {"threshold_k", p.threshold_k},
                        {"stake", p.stake},
                        {"clue_cost", p.clue_cost},
                        {"query_cost", p.query_cost},
                        {"client_value", p.client_value},
                        {"compensation", p.compensation},
                        {"epsilon_slash", p.epsilon_slash},
                        {"p0", c.adversary.node_budget},
                        {"p1", c.adversary.client_bribe},
                        {"nu", c.nu}};
}

ModelConfig model_from_json(const nlohmann::json& j, ModelConfig base) {
  if (!j.is_object()) throw ConfigError("model config must be a JSON object");
  auto& p = base.params;
  p.n_nodes = count_field(j, "n_nodes", p.n_nodes);
  p.n_byzantine = count_field(j, "n_byzantine", p.n_byzantine);
  p.threshold_k = count_field(j, "threshold_k", p.threshold_k);
  p.stake = number_field(j, "stake", p.stake);
  p.clue_cost = number_field(j, "clue_cost", p.clue_cost);
  p.query_cost = number_field(j, "query_cost", p.query_cost);
  p.client_value = number_field(j, "client_value", p.client_value);
  p.compensation = number_field(j, "compensation", p.compensation);
  p.epsilon_slash = number_field(j, "epsilon_slash", p.epsilon_slash);
  base.adversary.node_budget = number_field(j, "p0", base.adversary.node_budget);
  base.adversary.client_bribe = number_field(j, "p1", base.adversary.client_bribe);
  base.nu = number_field(j, "nu", base.nu);
  if (base.adversary.node_budget < 0.0) throw ConfigError("field 'p0': must be >= 0");
  if (base.adversary.client_bribe < 0.0) throw ConfigError("field 'p1': must be >= 0");
  if (!(base.nu > 0.0 && base.nu <= 1.0)) throw ConfigError("field 'nu': must lie in (0, 1]");
  return base;
}

nlohmann::json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Byte offsets are 1-based and point just past the offending token.
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream msg;
    msg << origin << ":" << line << ":" << column << ": JSON syntax error";
    throw ConfigError(msg.str());
  }
}

}  // namespace dac
