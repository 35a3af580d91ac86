#include <doctest.h>

#include <cmath>

#include "mimpact/errors.hpp"
#include "mimpact/impact_models.hpp"
#include "mimpact/special_fn.hpp"
#include "support.hpp"

using namespace mimpact;
using namespace mimpact::test;

namespace {

// Optimal inventory from the Euler-Lagrange problem x'' = k^2 x, x(0) = Q, x(T) = 0,
// solved by RK4 shooting on x'(0). The problem is linear, so two shots determine the slope.
double ac_shooting_oracle(double k, double q, double horizon, double t) {
  const int n = 20000;
  auto shoot = [&](double slope, double until) {
    double x = q, y = slope;
    const int steps = static_cast<int>(std::llround(n * until / horizon));
    const double h = until / steps;
    for (int i = 0; i < steps; ++i) {
      const double k1x = y, k1y = k * k * x;
      const double k2x = y + 0.5 * h * k1y, k2y = k * k * (x + 0.5 * h * k1x);
      const double k3x = y + 0.5 * h * k2y, k3y = k * k * (x + 0.5 * h * k2x);
      const double k4x = y + h * k3y, k4y = k * k * (x + h * k3x);
      x += h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
      y += h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y);
    }
    return x;
  };
  const double e0 = shoot(0.0, horizon);
  const double e1 = shoot(-1.0, horizon);
  const double slope = e0 / (e1 - e0);  // root of the affine end value e0 + s (e0 - e1)
  return shoot(slope, t);
}

// prefactor * integral_0^min(z,1) (1-s)^(alpha delta) (z-s)^(-gamma) ds by quadrature, written
// in the distance t to the singular end so the singularity sits exactly at zero.
double trajectory_oracle(const PropagatorParams& p, double z) {
  const double ad = p.alpha * p.delta;
  QuadratureSpec s;
  s.lower = 0;
  s.upper = std::min(z, 1.0);
  s.rel_tol = 1e-11;
  if (z < 1) {
    s.integrand = [&](double t) { return std::pow(1 - z + t, ad) * std::pow(t, -p.gamma); };
    if (p.gamma > 0) s.lower_exponent = -p.gamma;
  } else {
    s.integrand = [&](double t) { return std::pow(t, ad) * std::pow(z - 1 + t, -p.gamma); };
    if (ad < 0) s.lower_exponent = ad;
  }
  const double pref = std::pow(p.eta, p.delta) * std::pow(1 + p.alpha, p.delta) * std::pow(p.duration_f, 1 - p.gamma);
  return pref * integrate(s);
}

}  // namespace

TEST_CASE("Almgren-Chriss inventory") {
  const AcParams p{1, 1, 1, 1, 10};
  CHECK(ac_optimal_inventory(p, 5) == doctest::Approx(10 * std::sinh(5.0) / std::sinh(10.0)).epsilon(1e-13));
  CHECK(ac_optimal_inventory(p, 5) == doctest::Approx(0.06738).epsilon(1e-4));
  CHECK(rel_err(ac_optimal_inventory(p, 5), ac_shooting_oracle(p.k(), p.quantity(), 10, 5)) < 1e-7);
  CHECK(ac_optimal_inventory(p, 10) == 0.0);
  CHECK(ac_optimal_inventory(p, 0) == doctest::Approx(10.0).epsilon(1e-15));

  Gen g(41);
  for (int i = 0; i < 50; ++i) {
    const AcParams r{g.uniform(0.1, 3), g.uniform(0, 2), g.uniform(0, 2), g.uniform(0.01, 1), g.uniform(0.5, 5)};
    const double t = g.uniform(0, r.horizon_t);
    CHECK(rel_err(ac_optimal_inventory(r, t), ac_shooting_oracle(r.k(), r.quantity(), r.horizon_t, t)) < 1e-7);
  }
}

TEST_CASE("Almgren-Chriss small risk aversion is linear") {
  const AcParams p{1, 1, 1e-14, 0.3, 2};
  for (double t : {0.0, 0.5, 1.0, 1.7, 2.0}) {
    CHECK(ac_optimal_inventory(p, t) == doctest::Approx(0.6 * (1 - t / 2)).epsilon(1e-10));
  }
  const AcParams neutral{1, 1, 0, 0.3, 2};
  CHECK(ac_trajectory(neutral, 1.0) == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("Almgren-Chriss impact path") {
  for (double lam : {0.0, 0.1, 0.5, 1.0, 4.0}) {
    const AcParams p{0.7, 1.3, lam, 0.2, 3};
    CHECK(ac_trajectory(p, 0) == 0.0);
    CHECK(ac_trajectory(p, 3) == doctest::Approx(0.7 * 0.2 * 3).epsilon(1e-14));
    double prev = 0;
    for (double t = 0; t <= 3; t += 0.01) {
      const double x = ac_trajectory(p, t);
      CHECK(x >= prev - 1e-15);
      prev = x;
    }
  }
  CHECK_THROWS_AS(ac_trajectory(AcParams{1, 1, -0.1, 1, 1}, 0.5), DomainError);
  CHECK_THROWS_AS(ac_trajectory(AcParams{0, 1, 0.1, 1, 1}, 0.5), DomainError);
  CHECK_THROWS_AS(ac_trajectory(AcParams{1, 1, 0.1, 1, 1}, 1.5), DomainError);
}

TEST_CASE("VWAP propagator closed forms") {
  PropagatorParams p{0.5, 0.5, 0, 0.01, 0.25};
  CHECK(vwap_temporary(p) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(vwap_trajectory(p, 1.0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(vwap_trajectory(p, 2.0) == doctest::Approx(0.1 * (std::sqrt(2.0) - 1)).epsilon(1e-14));
  CHECK(vwap_trajectory(p, 0.5) == doctest::Approx(0.1 * std::sqrt(0.5)).epsilon(1e-14));

  PropagatorParams ac_like{1, 0, 0, 0.03, 0.4};
  CHECK(vwap_temporary(ac_like) == doctest::Approx(ac_like.pi()).epsilon(1e-15));
  p.eta = 0;
  CHECK(vwap_temporary(p) == 0.0);

  PropagatorParams far{0.5, 0.5, 0, 0.1, 0.5};
  CHECK(vwap_trajectory(far, 1e6) < 1e-3 * vwap_temporary(far));
}

TEST_CASE("VWAP factorisation at criticality") {
  Gen g(42);
  for (int i = 0; i < 20; ++i) {
    const double delta = g.uniform(0.2, 0.9);
    const double pi = g.log_uniform(1e-5, 0.1);
    const double f1 = g.uniform(pi, 1.0);
    const double f2 = g.uniform(pi, 1.0);
    PropagatorParams a{delta, 1 - delta, 0, pi / f1, f1};
    PropagatorParams b{delta, 1 - delta, 0, pi / f2, f2};
    CHECK(rel_err(vwap_temporary(a), vwap_temporary(b)) < 1e-12);
  }
}

TEST_CASE("alpha execution rate") {
  PropagatorParams p{0.5, 0.5, 0, 0.2, 0.5};
  CHECK(alpha_rate(p, 0.3) == doctest::Approx(0.2).epsilon(1e-15));
  p.alpha = 1;
  CHECK(alpha_rate(p, 0.5) == 0.0);
  for (double alpha : {0.0, 0.5, 1.0, 4.0}) {
    p.alpha = alpha;
    QuadratureSpec s;
    s.integrand = [&](double x) { return alpha_rate(p, x); };
    s.upper = p.duration_f;
    s.rel_tol = 1e-12;
    CHECK(std::fabs(integrate(s) - p.pi()) < 1e-10);
  }
  // A singular end rate cannot be sampled within an ulp of F, so stop short of it and
  // compare with the untraded remainder pi (eps)^(alpha + 1).
  for (double alpha : {-0.7, -0.5}) {
    p.alpha = alpha;
    const double eps = 1e-6;
    QuadratureSpec s;
    s.integrand = [&](double x) { return alpha_rate(p, x); };
    s.upper = p.duration_f * (1 - eps);
    s.rel_tol = 1e-12;
    CHECK(std::fabs(integrate(s) + p.pi() * std::pow(eps, alpha + 1) - p.pi()) < 1e-10);
  }
  p.alpha = -1;
  CHECK_THROWS_AS(alpha_rate(p, 0.1), DomainError);
}

TEST_CASE("alpha temporary impact") {
  PropagatorParams p{0.5, 0.5, 1, 0.01, 0.25};
  CHECK(alpha_temporary(p) == doctest::Approx(std::sqrt(2.0) * 0.05).epsilon(1e-14));
  p.alpha = 0;
  CHECK(alpha_temporary(p) == doctest::Approx(vwap_temporary(p)).epsilon(1e-15));
  // eta = F = 1, alpha = 4: (1 + 4)^(1/2) / (1 + 2 - 1/2).
  const PropagatorParams q{0.5, 0.5, 4, 1, 1};
  CHECK(alpha_temporary(q) == doctest::Approx(std::sqrt(5.0) / 2.5).epsilon(1e-14));
  CHECK_THROWS_AS(alpha_temporary(PropagatorParams{0.5, 0.6, -0.9, 0.1, 0.1}), DivergenceError);
  CHECK(PropagatorParams{0.3, 0.5, 0, 0.1, 0.1}.manipulation_flag());
  CHECK_FALSE(PropagatorParams{0.5, 0.5, 0, 0.1, 0.1}.manipulation_flag());
}

TEST_CASE("alpha trajectory against quadrature") {
  for (double alpha : {-0.5, 0.0, 1.0, 4.0}) {
    const PropagatorParams p{0.5, 0.5, alpha, 0.05, 0.3};
    for (int k = 1; k <= 30; ++k) {
      if (k == 10) continue;
      const double z = 0.1 * k;
      CHECK_MESSAGE(rel_err(alpha_trajectory(p, z), trajectory_oracle(p, z)) < 1e-6, alpha << " " << z);
    }
    CHECK(alpha_trajectory(p, 1.0) == doctest::Approx(alpha_temporary(p)).epsilon(1e-12));
  }
  CHECK(alpha_trajectory(PropagatorParams{0.5, 0.5, 0, 0.05, 0.3}, 2.0) ==
        doctest::Approx(vwap_trajectory(PropagatorParams{0.5, 0.5, 0, 0.05, 0.3}, 2.0)).epsilon(1e-13));
}

TEST_CASE("alpha trajectory against quadrature on random parameters") {
  Gen g(43);
  for (int i = 0; i < 300; ++i) {
    PropagatorParams p;
    p.delta = g.uniform(0.1, 1.0);
    p.gamma = g.uniform(0.0, 0.9);
    const double alpha_min = std::max(-0.95, (p.gamma - 1) / p.delta + 0.05);
    p.alpha = g.uniform(alpha_min, 5.0);
    p.eta = g.log_uniform(1e-4, 1);
    p.duration_f = g.log_uniform(1e-2, 1);
    double z = g.uniform(0.02, 3.0);
    if (std::fabs(z - 1) < 1e-3) z += 0.01;
    CHECK_MESSAGE(rel_err(alpha_trajectory(p, z), trajectory_oracle(p, z)) < 1e-6,
                  p.delta << " " << p.gamma << " " << p.alpha << " " << z);
  }
}

TEST_CASE("front-loaded trajectories peak before completion") {
  const PropagatorParams p{0.5, 0.5, 4, 1, 1};
  double best = -1, arg = 0;
  for (int k = 1; k <= 1000; ++k) {
    const double z = k / 1000.0;
    const double v = alpha_trajectory(p, z);
    if (v > best) {
      best = v;
      arg = z;
    }
  }
  CHECK(arg < 1.0);
  CHECK(best > alpha_temporary(p));
}

TEST_CASE("trajectories reach the temporary-impact surface from above or below") {
  // At each time v < F compare with the temporary impact of the same profile family run for
  // duration v at the same eta.
  for (double alpha : {1.0, 4.0, -0.5}) {
    const PropagatorParams p{0.5, 0.5, alpha, 0.1, 0.6};
    for (double z : {0.2, 0.5, 0.8, 0.95}) {
      PropagatorParams shorter = p;
      shorter.duration_f = z * p.duration_f;
      const double path = alpha_trajectory(p, z);
      const double surface = alpha_temporary(shorter);
      if (alpha > 0) {
        CHECK(path > surface);
      } else {
        CHECK(path < surface);
      }
    }
  }
}

TEST_CASE("VWAP build-up and decay are monotone") {
  const PropagatorParams p{0.6, 0.4, 0, 0.1, 0.5};
  double prev = 0;
  for (int k = 1; k < 100; ++k) {
    const double v = alpha_trajectory(p, k / 100.0);
    CHECK(v > prev);
    prev = v;
  }
  prev = alpha_temporary(p);
  for (int k = 1; k <= 200; ++k) {
    const double v = alpha_trajectory(p, 1 + k / 50.0);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("simulation: noiseless paths follow the closed form") {
  // Kernel singularity gives step^(1 - gamma); a singular end rate (alpha < 0) adds
  // step^(1 + alpha delta - gamma), which dominates.
  auto worst_error = [](const PropagatorParams& p, double step) {
    SimulationConfig cfg;
    cfg.noise_scale = 0;
    cfg.step = step;
    const auto path = simulate_metaorder_path(p, cfg);
    CHECK_FALSE(path.coarse_step);
    double worst = 0;
    for (std::size_t k = 1; k < path.z.size(); ++k) {
      worst = std::max(worst, std::fabs(path.impact[k] - alpha_trajectory(p, path.z[k])));
    }
    return worst;
  };
  for (double alpha : {-0.5, 0.0, 1.0, 4.0}) {
    const PropagatorParams p{0.5, 0.5, alpha, 0.2, 0.5};
    const double order = std::min(1 - p.gamma, 1 + alpha * p.delta - p.gamma);
    const double fine = worst_error(p, 1e-3);
    CHECK_MESSAGE(fine <= std::pow(1e-3, order), alpha);
    if (alpha == 0) {
      CHECK(fine < 1e-10);
    } else {
      const double coarse = worst_error(p, 4e-3);
      CHECK_MESSAGE(coarse / fine >= 0.8 * std::pow(4.0, order), alpha);
    }
  }
}

TEST_CASE("simulation: Monte Carlo mean at completion") {
  const PropagatorParams p{0.5, 0.5, 0, 0.2, 0.5};
  SimulationConfig cfg;
  cfg.step = 1e-2;
  cfg.horizon_multiple = 1;
  const int n = 10000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    cfg.seed = static_cast<std::uint64_t>(i);
    const auto path = simulate_metaorder_path(p, cfg);
    const auto at_end = static_cast<std::size_t>(std::llround(1.0 / (path.step / p.duration_f)));
    const double x = path.impact[at_end];
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / (n - 1));
  CHECK(std::fabs(mean - alpha_temporary(p)) < 3 * se);
}

TEST_CASE("simulation: determinism and coarse-step flag") {
  const PropagatorParams p{0.5, 0.5, 1, 0.1, 0.3};
  SimulationConfig cfg;
  cfg.seed = 99;
  const auto a = simulate_metaorder_path(p, cfg);
  const auto b = simulate_metaorder_path(p, cfg);
  CHECK(a.impact == b.impact);
  cfg.seed = 100;
  CHECK(simulate_metaorder_path(p, cfg).impact != a.impact);

  const PropagatorParams tiny{0.5, 0.5, 0, 0.1, 0.005};
  CHECK(simulate_metaorder_path(tiny, SimulationConfig{}).coarse_step);

  SimulationConfig bad;
  bad.step = 0;
  CHECK_THROWS_AS(simulate_metaorder_path(p, bad), DomainError);
  bad.step = 1e-3;
  bad.horizon_multiple = 0.5;
  CHECK_THROWS_AS(simulate_metaorder_path(p, bad), DomainError);
}

TEST_CASE("simulation: Almgren-Chriss noiseless path") {
  const AcParams p{1, 1, 0.5, 0.3, 2};
  SimulationConfig cfg;
  cfg.noise_scale = 0;
  cfg.step = 1e-3;
  const auto path = simulate_metaorder_path(p, cfg);
  for (std::size_t k = 0; k < path.z.size(); k += 97) {
    const double t = std::min(path.time[k], p.horizon_t);
    CHECK(path.impact[k] == doctest::Approx(ac_trajectory(p, t)).epsilon(1e-9));
  }
}
