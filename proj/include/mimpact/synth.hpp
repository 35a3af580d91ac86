#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "mimpact/core_types.hpp"
#include "mimpact/estimation.hpp"
#include "mimpact/families.hpp"

namespace mimpact {

/// Density proportional to x^exponent on [lo, hi].
struct PowerLaw {
  double exponent = 0;
  double lo = 0.01;
  double hi = 1;

  void validate() const;
  double cdf(double x) const;
  double mean() const;
  double variance() const;
  double quantile(double u) const;
};

double sample_trunc_power(double exponent, double lo, double hi, std::mt19937_64& rng);

/// Independent stream seed for `stream` derived from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

enum class VolumeProfile { flat, u_shape };

struct PopulationConfig {
  std::size_t n_orders = 10000;
  PowerLaw eta_law{-0.864, 1e-4, 0.3};
  PowerLaw f_law{-0.932, 0.01, 1.0};
  /// Probability that two orders of the same (symbol, day) share a sign.
  double herding_p_same = 0.5;
  std::size_t days = 20;
  std::size_t symbols = 10;
  std::uint64_t seed = 0;
  Date start_date{2024, 1, 2};
  double daily_volume = 1e6;
  VolumeProfile profile = VolumeProfile::flat;

  void validate() const;
  /// Probability that an order follows its day's mood.
  double mood_probability() const;
};

struct SyntheticOrder {
  Metaorder order;
  ExecutionDescriptors truth;
  double v_start = 0;
};

/// Minute bars of one session with the configured volume profile and a flat price.
std::vector<MinuteBar> session_bars(const Date& date, double daily_volume, VolumeProfile profile,
                                    double price = 100.0);

std::vector<SyntheticOrder> generate_population(const PopulationConfig& cfg);

// Impact models a synthetic market can be driven by.
struct PropagatorModel {
  double delta = 0.5;
  double gamma = 0.5;
  double alpha = 0;
};
/// Almgren-Chriss in volume time with T = F.
struct AcModel {
  double a = 1;
  double sigma = 1;
  double lambda = 0;
};
/// Temporary impact from a fitted family, build-up and decay shaped like a VWAP propagator
/// with kernel exponent `shape_gamma`.
struct CurveModel {
  Family family = Family::log;
  std::vector<double> params{0.028, 465};
  double shape_gamma = 0.5;
};

using ImpactModel = std::variant<PropagatorModel, AcModel, CurveModel>;

double model_temporary(const ImpactModel& model, double eta, double duration_f);
/// Impact at z = elapsed volume time / F.
double model_trajectory(const ImpactModel& model, double eta, double duration_f, double z);

struct MarketConfig {
  double sigma = 0.02;  // target daily range proxy
  double noise_scale = 1.0;
  double open_price = 100.0;
};

struct SyntheticMarketDay {
  std::string symbol;
  Date date;
  std::vector<MinuteBar> bars;
  std::vector<SyntheticOrder> orders;
  double sigma_proxy = 0;
  bool sigma_pinned = false;  // proxy equals MarketConfig::sigma exactly
};

/// One session whose log-price is sigma times the sum of the signed model trajectories of
/// `orders` plus Brownian noise in volume time. The day's range is pinned to sigma when the
/// generated path is narrower.
SyntheticMarketDay build_market_day(const std::string& symbol, const Date& date,
                                    std::vector<SyntheticOrder> orders, const ImpactModel& model,
                                    const MarketConfig& market, double daily_volume = 1e6,
                                    VolumeProfile profile = VolumeProfile::flat,
                                    std::uint64_t noise_seed = 0);

std::vector<SyntheticMarketDay> generate_market(const PopulationConfig& cfg,
                                                const ImpactModel& model,
                                                const MarketConfig& market = {});

struct PathConfig {
  double noise_scale = 1.0;
  double horizon_multiple = 3.0;
  int points_per_unit = 20;  // samples per duration
};

/// Model-level impact paths: closed-form trajectory plus Brownian noise in volume time,
/// each order independent of the others.
std::vector<OrderPath> independent_paths(const std::vector<SyntheticOrder>& population,
                                         const ImpactModel& model, const PathConfig& cfg,
                                         std::uint64_t seed);

}  // namespace mimpact
