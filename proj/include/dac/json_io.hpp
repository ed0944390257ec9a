#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dac/model.hpp"

namespace dac {

/// Everything a flat model JSON object carries.
struct ModelConfig {
  ProtocolParams params;
  AdversaryParams adversary;
  double nu = 1.0;

  UtilitySpec node_utility() const { return UtilitySpec::for_nodes(nu, params); }
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Field names are part of the on-disk format.
inline constexpr const char* kModelFields[] = {
    "n_nodes",      "n_byzantine", "threshold_k", "stake", "clue_cost", "query_cost",
    "client_value", "compensation", "epsilon_slash", "p0", "p1",        "nu"};

nlohmann::json to_json(const ModelConfig& config);

/// Overlays the model fields present in `j` onto `base`. Fields not in
/// kModelFields are ignored here; callers decide whether they are errors.
/// Throws ConfigError naming the offending field on a type mismatch.
ModelConfig model_from_json(const nlohmann::json& j, ModelConfig base = {});

/// Parses JSON text, turning syntax errors into ConfigError with line:column.
nlohmann::json parse_json_text(const std::string& text, const std::string& origin);

}  // namespace dac
