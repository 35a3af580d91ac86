#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace mimpact {

struct Hyp2F1Args {
  double a = 0;
  double b = 0;
  double c = 1;
  double z = 0;
};

/// Gauss hypergeometric function 2F1(a, b; c; z) for real z <= 1.
/// z > 1 is accepted only when the series terminates. Throws DomainError when c is a
/// non-positive integer or the value diverges (z = 1 with c - a - b <= 0).
double hyp2f1(double a, double b, double c, double z);
inline double hyp2f1(const Hyp2F1Args& args) { return hyp2f1(args.a, args.b, args.c, args.z); }

namespace detail {
/// Direct power series; requires |z| < 1.
double hyp2f1_series(double a, double b, double c, double z);
/// Connection formula around z = 1; requires 0 < z < 1.
double hyp2f1_one_minus_z(double a, double b, double c, double z);
}  // namespace detail

struct QuadratureSpec {
  std::function<double(double)> integrand;
  double lower = 0;
  double upper = 1;
  double rel_tol = 1e-8;
  double abs_tol = 0;
  /// Integrand behaves like |x - endpoint|^p near the endpoint, with -1 < p.
  /// Abscissae near `upper` are formed as upper - d and lose digits when d is below
  /// machine precision of upper, so strong singularities are best placed at lower = 0.
  std::optional<double> lower_exponent;
  std::optional<double> upper_exponent;
  /// Interior points where the integrand is not smooth.
  std::vector<double> breakpoints;
  std::size_t max_intervals = 4000;
};

struct QuadratureResult {
  double value = 0;
  double error = 0;
  std::size_t intervals = 0;
  int max_depth = 0;  // deepest bisection level reached
};

/// Global adaptive Gauss-Kronrod (7/15) quadrature. Throws QuadratureError, carrying the
/// best estimate, if the tolerance is not met within `max_intervals`.
QuadratureResult integrate_detailed(const QuadratureSpec& spec);
double integrate(const QuadratureSpec& spec);

}  // namespace mimpact
