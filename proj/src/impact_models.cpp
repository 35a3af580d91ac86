#include "mimpact/impact_models.hpp"

#include <cmath>
#include <random>

#include "mimpact/errors.hpp"
#include "mimpact/special_fn.hpp"

namespace mimpact {

double AcParams::k() const { return std::sqrt(lambda * sigma * sigma / a); }

void AcParams::validate() const {
  if (!(a > 0)) throw DomainError("Almgren-Chriss: a must be positive");
  if (!(sigma >= 0)) throw DomainError("Almgren-Chriss: sigma must be non-negative");
  if (!(lambda >= 0)) throw DomainError("Almgren-Chriss: lambda must be non-negative");
  if (!(horizon_t > 0)) throw DomainError("Almgren-Chriss: T must be positive");
  if (!(eta >= 0)) throw DomainError("Almgren-Chriss: eta must be non-negative");
}

namespace {

void check_time(const AcParams& p, double t) {
  p.validate();
  if (!(t >= 0 && t <= p.horizon_t)) throw DomainError("Almgren-Chriss: t outside [0, T]");
}

}  // namespace

double ac_optimal_inventory(const AcParams& p, double t) {
  check_time(p, t);
  const double q = p.quantity();
  const double k = p.k();
  const double tt = p.horizon_t;
  if (k == 0) return q * (1 - t / tt);
  // sinh(k(T - t)) / sinh(kT) without overflow for large kT.
  return q * std::exp(-k * t) * std::expm1(-2 * k * (tt - t)) / std::expm1(-2 * k * tt);
}

double ac_trading_rate(const AcParams& p, double t) {
  check_time(p, t);
  const double q = p.quantity();
  const double k = p.k();
  const double tt = p.horizon_t;
  if (k == 0) return q / tt;
  return q * k * std::exp(-k * t) * (1 + std::exp(-2 * k * (tt - t))) / -std::expm1(-2 * k * tt);
}

double ac_trajectory(const AcParams& p, double t) {
  return p.a * (p.quantity() - ac_optimal_inventory(p, t));
}

// ---------------------------------------------------------------------------

void PropagatorParams::validate() const {
  if (!(delta > 0 && delta <= 1)) throw DomainError("propagator: delta must lie in (0, 1]");
  if (!(gamma >= 0 && gamma < 1)) throw DomainError("propagator: gamma must lie in [0, 1)");
  if (!(alpha > -1)) throw DomainError("propagator: alpha must exceed -1");
  if (!(eta >= 0)) throw DomainError("propagator: eta must be non-negative");
  if (!(duration_f > 0)) throw DomainError("propagator: duration must be positive");
  if (!(1 + alpha * delta - gamma > 0)) {
    throw DivergenceError("propagator: impact diverges unless 1 + alpha*delta - gamma > 0");
  }
}

double vwap_temporary(const PropagatorParams& p) {
  PropagatorParams q = p;
  q.alpha = 0;
  q.validate();
  return std::pow(q.eta, q.delta) * std::pow(q.duration_f, 1 - q.gamma) / (1 - q.gamma);
}

double vwap_trajectory(const PropagatorParams& p, double z) {
  if (!(z >= 0)) throw DomainError("propagator: z must be non-negative");
  const double peak = vwap_temporary(p);
  const double e = 1 - p.gamma;
  if (z < 1) return peak * std::pow(z, e);
  if (z == 1) return peak;
  return peak * (std::pow(z, e) - std::pow(z - 1, e));
}

double alpha_rate(const PropagatorParams& p, double s) {
  p.validate();
  const double f = p.duration_f;
  if (!(s >= 0 && s <= f)) throw DomainError("propagator: s outside [0, F]");
  return p.pi() * (p.alpha + 1) * std::pow(f - s, p.alpha) / std::pow(f, p.alpha + 1);
}

double alpha_temporary(const PropagatorParams& p) {
  p.validate();
  return std::pow(p.eta, p.delta) * std::pow(p.duration_f, 1 - p.gamma) *
         std::pow(1 + p.alpha, p.delta) / (1 + p.alpha * p.delta - p.gamma);
}

double alpha_trajectory(const PropagatorParams& p, double z) {
  p.validate();
  if (!(z >= 0)) throw DomainError("propagator: z must be non-negative");
  if (z == 0) return 0;
  if (z == 1) return alpha_temporary(p);
  const double ad = p.alpha * p.delta;
  const double pref = std::pow(p.eta, p.delta) * std::pow(1 + p.alpha, p.delta) *
                      std::pow(p.duration_f, 1 - p.gamma);
  if (z < 1) {
    return pref * std::pow(z, 1 - p.gamma) / (1 - p.gamma) * hyp2f1(1, -ad, 2 - p.gamma, z);
  }
  return pref * std::pow(z, -p.gamma) / (1 + ad) * hyp2f1(1, p.gamma, 2 + ad, 1 / z);
}

// ---------------------------------------------------------------------------

void SimulationConfig::validate() const {
  if (!(step > 0)) throw DomainError("simulation: step must be positive");
  if (!(horizon_multiple >= 1)) throw DomainError("simulation: horizon_multiple must be >= 1");
  if (!(noise_scale >= 0)) throw DomainError("simulation: noise_scale must be non-negative");
}

namespace {

struct Grid {
  int n_exec;
  int n_total;
  double h;
};

Grid make_grid(double duration, const SimulationConfig& cfg) {
  Grid g;
  g.n_exec = std::max(1, static_cast<int>(std::lround(duration / cfg.step)));
  g.h = duration / g.n_exec;
  g.n_total = static_cast<int>(std::ceil(cfg.horizon_multiple * g.n_exec - 1e-9));
  return g;
}

void add_noise(SimulatedPath& path, const SimulationConfig& cfg) {
  path.impact = path.deterministic;
  if (cfg.noise_scale == 0) return;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, cfg.noise_scale * std::sqrt(path.step));
  double w = 0;
  for (std::size_t j = 1; j < path.impact.size(); ++j) {
    w += normal(rng);
    path.impact[j] += w;
  }
}

}  // namespace

SimulatedPath simulate_metaorder_path(const PropagatorParams& p, const SimulationConfig& cfg) {
  p.validate();
  cfg.validate();
  const double f = p.duration_f;
  const Grid g = make_grid(f, cfg);
  SimulatedPath path;
  path.step = g.h;
  path.coarse_step = f / cfg.step < 10;

  // Cell-averaged impact per cell: f(mean rate over the cell).
  std::vector<double> cell_impact(g.n_exec);
  const double a1 = p.alpha + 1;
  for (int i = 0; i < g.n_exec; ++i) {
    const double u0 = 1 - static_cast<double>(i) / g.n_exec;
    const double u1 = 1 - static_cast<double>(i + 1) / g.n_exec;
    const double mean_rate = p.pi() * (std::pow(u0, a1) - std::pow(u1, a1)) / g.h;
    cell_impact[i] = std::pow(mean_rate, p.delta);
  }
  // Exact kernel integral over a cell ending m cells before the evaluation time.
  const double e = 1 - p.gamma;
  const double scale = std::pow(g.h, e) / e;
  std::vector<double> kernel(g.n_total + 1);
  for (int m = 1; m <= g.n_total; ++m) {
    kernel[m] = scale * (std::pow(static_cast<double>(m), e) - std::pow(m - 1.0, e));
  }

  path.z.resize(g.n_total + 1);
  path.time.resize(g.n_total + 1);
  path.deterministic.assign(g.n_total + 1, 0.0);
  for (int j = 0; j <= g.n_total; ++j) {
    path.time[j] = j * g.h;
    path.z[j] = static_cast<double>(j) / g.n_exec;
    double acc = 0;
    const int last = std::min(j, g.n_exec);
    for (int i = 0; i < last; ++i) acc += cell_impact[i] * kernel[j - i];
    path.deterministic[j] = acc;
  }
  add_noise(path, cfg);
  return path;
}

SimulatedPath simulate_metaorder_path(const AcParams& p, const SimulationConfig& cfg) {
  p.validate();
  cfg.validate();
  const Grid g = make_grid(p.horizon_t, cfg);
  SimulatedPath path;
  path.step = g.h;
  path.coarse_step = p.horizon_t / cfg.step < 10;
  path.z.resize(g.n_total + 1);
  path.time.resize(g.n_total + 1);
  path.deterministic.assign(g.n_total + 1, 0.0);
  double traded = 0;
  for (int j = 0; j <= g.n_total; ++j) {
    path.time[j] = j * g.h;
    path.z[j] = static_cast<double>(j) / g.n_exec;
    if (j > 0 && j <= g.n_exec) {
      // Quantity traded in the cell, the exact integral of the rate.
      traded += ac_optimal_inventory(p, (j - 1) * g.h) -
                ac_optimal_inventory(p, std::min(j * g.h, p.horizon_t));
    }
    path.deterministic[j] = p.a * traded;
  }
  add_noise(path, cfg);
  return path;
}

}  // namespace mimpact
