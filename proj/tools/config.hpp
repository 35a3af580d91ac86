#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mimpact/core_types.hpp"
#include "mimpact/synth.hpp"

namespace mimpact::cli {

using nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every recognised key with its default value.
json default_config();

/// Overlays `overlay` onto `base`; unknown keys and type mismatches raise ConfigError.
void merge_config(json& base, const json& overlay, const std::string& where = "");

/// Applies `dotted.key=value`; the value is parsed as JSON, falling back to a plain string.
void apply_override(json& cfg, const std::string& assignment);

/// FNV-1a 64 of the canonical config text and the command name, as 16 hex digits.
std::string config_hash(const json& cfg, const std::string& command);

struct Preset {
  std::string name;
  std::string description;
  ImpactModel model;
};

const std::vector<Preset>& presets();

ImpactModel model_from_config(const json& cfg);
PopulationConfig population_from_config(const json& cfg);
MarketConfig market_from_config(const json& cfg);
FilterConfig filters_from_config(const json& cfg);

}  // namespace mimpact::cli
