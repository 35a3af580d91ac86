#pragma once

#include <cstdint>
#include <vector>

namespace mimpact {

/// Almgren-Chriss parameters, physical time.
struct AcParams {
  double a = 1;       // linear impact coefficient
  double sigma = 1;   // price volatility
  double lambda = 0;  // risk aversion
  double eta = 1;     // participation rate
  double horizon_t = 1;

  double k() const;
  double quantity() const { return eta * horizon_t; }
  void validate() const;
};

/// Remaining quantity x(t) of the optimal schedule.
double ac_optimal_inventory(const AcParams& p, double t);
/// Trading rate -dx/dt.
double ac_trading_rate(const AcParams& p, double t);
/// Immediate impact a (Q - x(t)).
double ac_trajectory(const AcParams& p, double t);

/// Power-law propagator with f(q) = q^delta, G(t) = t^-gamma and the alpha execution family.
struct PropagatorParams {
  double delta = 0.5;
  double gamma = 0.5;
  double alpha = 0;
  double eta = 0.01;
  double duration_f = 0.1;

  double pi() const { return eta * duration_f; }
  /// delta + gamma < 1 admits price manipulation; reported, not rejected.
  bool manipulation_flag() const { return delta + gamma < 1; }
  void validate() const;
};

double vwap_temporary(const PropagatorParams& p);
/// Impact at rescaled time z = v / F for the constant-rate profile.
double vwap_trajectory(const PropagatorParams& p, double z);

/// q(s) = pi (alpha + 1) (F - s)^alpha / F^(alpha + 1), s in [0, F].
double alpha_rate(const PropagatorParams& p, double s);
double alpha_temporary(const PropagatorParams& p);
double alpha_trajectory(const PropagatorParams& p, double z);

struct SimulationConfig {
  double noise_scale = 1.0;
  double step = 1e-3;  // volume-time grid step (physical time for Almgren-Chriss)
  std::uint64_t seed = 0;
  double horizon_multiple = 3.0;

  void validate() const;
};

struct SimulatedPath {
  std::vector<double> z;       // time / duration
  std::vector<double> time;    // volume time (or physical time for Almgren-Chriss)
  std::vector<double> impact;  // deterministic part plus noise
  std::vector<double> deterministic;
  double step = 0;             // effective grid step (duration divided by an integer)
  bool coarse_step = false;    // fewer than 10 steps during execution
};

/// Euler scheme on the impact integral: the rate is averaged over each cell and the kernel
/// is integrated exactly over it. Gaussian increments of variance step * noise_scale^2.
SimulatedPath simulate_metaorder_path(const PropagatorParams& p, const SimulationConfig& cfg);
SimulatedPath simulate_metaorder_path(const AcParams& p, const SimulationConfig& cfg);

}  // namespace mimpact
