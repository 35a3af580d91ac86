#include "config.hpp"

#include <cstdio>

#include "mimpact/families.hpp"

namespace mimpact::cli {

json default_config() {
  return json::parse(R"({
    "seed": 0,
    "population": {
      "n_orders": 10000,
      "eta_law": [-0.864, 0.0001, 0.3],
      "f_law": [-0.932, 0.01, 1.0],
      "herding_p_same": 0.5,
      "days": 50,
      "symbols": 20,
      "start_date": "2024-01-02",
      "daily_volume": 1000000.0,
      "profile": "flat"
    },
    "model": {
      "preset": "",
      "kind": "propagator",
      "delta": 0.5,
      "gamma": 0.5,
      "alpha": 0.0,
      "a": 1.0,
      "sigma": 1.0,
      "lambda": 0.0,
      "family": "log",
      "params": [0.028, 465.0],
      "shape_gamma": 0.5
    },
    "market": {
      "sigma": 0.02,
      "noise_scale": 1.0,
      "open_price": 100.0
    },
    "source": {
      "kind": "independent",
      "noise_scale": 1.0,
      "metaorders": "",
      "bars": ""
    },
    "filters": {
      "symbols": [],
      "latest_end": "16:01",
      "min_duration_minutes": 2.0,
      "max_eta": 0.3
    },
    "estimation": {
      "n_bins": 50,
      "book_bins": 1000,
      "families": ["power", "log"],
      "n_eta_bins": 10,
      "n_f_bins": 10,
      "surface_family": "double_power",
      "window": 5,
      "eta_bins": 4,
      "f_edges": [0.01, 0.05, 0.1, 0.2, 0.4, 1.0],
      "trajectory_eta_bin": 3,
      "trajectory_points": 40,
      "horizon_multiple": 3.0,
      "cross_day": false,
      "duration_bins": [0, 10, 25, 50, 100, 200, 390]
    },
    "simulate": {
      "eta": 1.0,
      "durations": [0.25, 0.5, 0.75, 1.0],
      "z_max": 3.0,
      "z_step": 0.01,
      "step": 0.001,
      "noise_scale": 0.0
    },
    "book": {
      "y_norm": 1.0,
      "b": 6.144,
      "n": 0.0,
      "pi_min": 0.00001,
      "pi_max": 0.9,
      "n_points": 100,
      "profile_points": 101
    }
  })");
}

namespace {

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

}  // namespace

void merge_config(json& base, const json& overlay, const std::string& where) {
  if (!overlay.is_object()) throw ConfigError("config" + where + " must be an object");
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    const std::string key = where.empty() ? it.key() : where + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_config(slot, it.value(), key);
      continue;
    }
    if (!same_kind(slot, it.value())) {
      throw ConfigError("config key '" + key + "' expects " + std::string(slot.type_name()) +
                        ", got " + std::string(it.value().type_name()));
    }
    if (slot.is_array() && !slot.empty()) {
      for (const auto& e : it.value()) {
        if (!same_kind(slot.front(), e)) {
          throw ConfigError("config key '" + key + "' has an element of the wrong type");
        }
      }
    }
    slot = it.value();
  }
}

void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' must look like key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  // Build a nested overlay {"a": {"b": value}} and merge it with the usual checks.
  json overlay = value;
  std::size_t end = path.size();
  for (;;) {
    const auto dot = path.rfind('.', end - 1);
    const std::string key = path.substr(dot == std::string::npos ? 0 : dot + 1,
                                        end - (dot == std::string::npos ? 0 : dot + 1));
    if (key.empty()) throw ConfigError("override '" + assignment + "' has an empty key");
    overlay = json{{key, overlay}};
    if (dot == std::string::npos) break;
    end = dot;
  }
  merge_config(cfg, overlay);
}

std::string config_hash(const json& cfg, const std::string& command) {
  const std::string text = command + "\n" + cfg.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = [] {
    std::vector<Preset> p;
    auto curve = [&](const std::string& name, const std::string& desc, Family f,
                     std::vector<double> params) {
      p.push_back(Preset{name, desc, CurveModel{f, std::move(params), 0.5}});
    };
    curve("sqrt-pooled", "power law Y=0.15, delta=0.47 (pooled fit)", Family::power, {0.15, 0.47});
    curve("log-pooled", "logarithm a=0.028, b=465 (pooled fit)", Family::log, {0.028, 465});
    curve("surface-power", "surface Y=0.207, delta=0.52, gamma1=0.54", Family::double_power,
          {0.207, 0.52, 0.54});
    curve("surface-log", "surface a=0.035, b=60, c=61", Family::double_log, {0.035, 60, 61});
    curve("power-2007", "power law fit, 2007", Family::power, {0.13, 0.41});
    curve("power-2008", "power law fit, 2008", Family::power, {0.12, 0.41});
    curve("power-2009", "power law fit, 2009", Family::power, {0.15, 0.46});
    curve("log-2007", "logarithm fit, 2007", Family::log, {0.029, 491});
    curve("log-2008", "logarithm fit, 2008", Family::log, {0.025, 547});
    curve("log-2009", "logarithm fit, 2009", Family::log, {0.032, 316});
    curve("power-large-cap", "power law fit, large caps", Family::power, {0.19, 0.51});
    curve("power-mid-cap", "power law fit, medium caps", Family::power, {0.15, 0.46});
    curve("power-small-cap", "power law fit, small caps", Family::power, {0.12, 0.42});
    curve("log-large-cap", "logarithm fit, large caps", Family::log, {0.030, 441});
    curve("log-mid-cap", "logarithm fit, medium caps", Family::log, {0.030, 400});
    curve("log-small-cap", "logarithm fit, small caps", Family::log, {0.027, 428});
    p.push_back(Preset{"critical-propagator", "propagator delta=gamma=0.5, VWAP",
                       PropagatorModel{0.5, 0.5, 0.0}});
    p.push_back(Preset{"front-loaded-propagator", "propagator delta=gamma=0.5, alpha=4",
                       PropagatorModel{0.5, 0.5, 4.0}});
    return p;
  }();
  return all;
}

ImpactModel model_from_config(const json& cfg) {
  const auto& m = cfg.at("model");
  const std::string preset = m.at("preset").get<std::string>();
  if (!preset.empty()) {
    for (const auto& p : presets()) {
      if (p.name == preset) return p.model;
    }
    throw ConfigError("unknown model preset '" + preset + "'");
  }
  const std::string kind = m.at("kind").get<std::string>();
  if (kind == "propagator") {
    return PropagatorModel{m.at("delta").get<double>(), m.at("gamma").get<double>(),
                           m.at("alpha").get<double>()};
  }
  if (kind == "ac") {
    return AcModel{m.at("a").get<double>(), m.at("sigma").get<double>(), m.at("lambda").get<double>()};
  }
  if (kind == "curve") {
    return CurveModel{parse_family(m.at("family").get<std::string>()),
                      m.at("params").get<std::vector<double>>(), m.at("shape_gamma").get<double>()};
  }
  throw ConfigError("model.kind must be propagator, ac or curve");
}

namespace {

PowerLaw law_from(const json& j, const std::string& key) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw ConfigError(key + " must be [exponent, lower, upper]");
  return PowerLaw{v[0], v[1], v[2]};
}

std::size_t positive_count(const json& j, const std::string& key) {
  const double v = j.get<double>();
  if (!(v >= 0) || v != static_cast<double>(static_cast<std::size_t>(v))) {
    throw ConfigError(key + " must be a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

PopulationConfig population_from_config(const json& cfg) {
  const auto& p = cfg.at("population");
  PopulationConfig out;
  out.n_orders = positive_count(p.at("n_orders"), "population.n_orders");
  out.eta_law = law_from(p.at("eta_law"), "population.eta_law");
  out.f_law = law_from(p.at("f_law"), "population.f_law");
  out.herding_p_same = p.at("herding_p_same").get<double>();
  out.days = positive_count(p.at("days"), "population.days");
  out.symbols = positive_count(p.at("symbols"), "population.symbols");
  out.start_date = Date::parse(p.at("start_date").get<std::string>());
  out.daily_volume = p.at("daily_volume").get<double>();
  const std::string profile = p.at("profile").get<std::string>();
  if (profile == "flat") {
    out.profile = VolumeProfile::flat;
  } else if (profile == "u_shape") {
    out.profile = VolumeProfile::u_shape;
  } else {
    throw ConfigError("population.profile must be flat or u_shape");
  }
  out.seed = derive_seed(cfg.at("seed").get<std::uint64_t>(), 0);
  out.validate();
  return out;
}

MarketConfig market_from_config(const json& cfg) {
  const auto& m = cfg.at("market");
  return MarketConfig{m.at("sigma").get<double>(), m.at("noise_scale").get<double>(),
                      m.at("open_price").get<double>()};
}

FilterConfig filters_from_config(const json& cfg) {
  const auto& f = cfg.at("filters");
  FilterConfig out;
  const auto symbols = f.at("symbols").get<std::vector<std::string>>();
  if (!symbols.empty()) out.symbol_whitelist = std::set<std::string>(symbols.begin(), symbols.end());
  out.latest_end = parse_clock(f.at("latest_end").get<std::string>());
  out.min_duration_minutes = f.at("min_duration_minutes").get<double>();
  out.max_eta = f.at("max_eta").get<double>();
  out.validate();
  return out;
}

}  // namespace mimpact::cli
