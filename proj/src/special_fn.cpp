#include "mimpact/special_fn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <queue>
#include <string>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "mimpact/errors.hpp"

namespace mimpact {

namespace {

bool is_nonpositive_integer(double x) { return x <= 0 && x == std::floor(x); }

// prod Gamma(num) / prod Gamma(den); a pole in the denominator gives 0.
double gamma_ratio(std::initializer_list<double> num, std::initializer_list<double> den) {
  for (double d : den) {
    if (is_nonpositive_integer(d)) return 0.0;
  }
  double direct = 1.0;
  for (double n : num) {
    if (is_nonpositive_integer(n)) throw DomainError("gamma pole in hypergeometric connection");
    direct *= std::tgamma(n);
  }
  for (double d : den) direct /= std::tgamma(d);
  if (std::isfinite(direct) && direct != 0.0) return direct;
  double log_abs = 0;
  int sign = 1;
  for (double n : num) {
    int s = 1;
    log_abs += boost::math::lgamma(n, &s);
    sign *= s;
  }
  for (double d : den) {
    int s = 1;
    log_abs -= boost::math::lgamma(d, &s);
    sign *= s;
  }
  return sign * std::exp(log_abs);
}

double terminating(double a, double b, double c, double z) {
  // One of a, b is a non-positive integer -N: finite sum of N + 1 terms.
  const double n_neg = is_nonpositive_integer(a) ? a : b;
  const int n_terms = static_cast<int>(-n_neg);
  long double sum = 1, term = 1;
  for (int k = 0; k < n_terms; ++k) {
    term *= static_cast<long double>(a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    sum += term;
  }
  return static_cast<double>(sum);
}

// c = a + b + m with integer m >= 0, 0 < z < 1 (logarithmic case of the connection formula).
double integer_gap(double a, double b, int m, double z) {
  const double c = a + b + m;
  const double w = 1.0 - z;
  long double finite_part = 0;
  if (m > 0) {
    long double term = 1, sum = 1;
    for (int n = 0; n + 1 < m; ++n) {
      term *= static_cast<long double>(a + n) * (b + n) / ((n + 1.0) * (1.0 - m + n)) * w;
      sum += term;
    }
    finite_part = sum * gamma_ratio({static_cast<double>(m), c}, {a + m, b + m});
  }
  double psi_1 = boost::math::digamma(1.0);
  double psi_m1 = boost::math::digamma(m + 1.0);
  double psi_a = boost::math::digamma(a + m);
  double psi_b = boost::math::digamma(b + m);
  const double log_w = std::log(w);
  long double coef = 1;
  for (int k = 2; k <= m; ++k) coef /= k;  // 1 / m!
  long double sum = 0;
  for (int n = 0; n < 100000; ++n) {
    const long double term = coef * (log_w - psi_1 - psi_m1 + psi_a + psi_b);
    sum += term;
    const double ratio = std::fabs((a + m + n) * (b + m + n) / ((n + 1.0) * (n + m + 1.0)) * w);
    if (coef == 0 || (n > 2 && ratio < 1 && std::fabs(term) <= 1e-17L * std::fabs(sum))) break;
    coef *= static_cast<long double>(a + m + n) * (b + m + n) / ((n + 1.0) * (n + m + 1.0)) * w;
    psi_1 += 1.0 / (n + 1.0);
    psi_m1 += 1.0 / (n + m + 1.0);
    psi_a += 1.0 / (a + m + n);
    psi_b += 1.0 / (b + m + n);
  }
  const double sign = (m % 2 == 0) ? 1.0 : -1.0;
  const long double log_part =
      -sign * std::pow(w, m) * gamma_ratio({c}, {a, b}) * sum;
  return static_cast<double>(finite_part + log_part);
}

double integer_gap_any_sign(double a, double b, int m, double z) {
  if (m >= 0) return integer_gap(a, b, m, z);
  // Euler transform flips the sign of c - a - b.
  const double c = a + b + m;
  return std::pow(1.0 - z, m) * integer_gap(c - a, c - b, -m, z);
}

double connection_generic(double a, double b, double c, double z) {
  const double d = c - a - b;
  const double w = 1.0 - z;
  double result = 0;
  const double g1 = gamma_ratio({c, d}, {c - a, c - b});
  if (g1 != 0.0) result += g1 * hyp2f1(a, b, 1.0 - d, w);
  const double g2 = gamma_ratio({c, -d}, {a, b});
  if (g2 != 0.0) result += std::pow(w, d) * g2 * hyp2f1(c - a, c - b, 1.0 + d, w);
  return result;
}

}  // namespace

namespace detail {

double hyp2f1_series(double a, double b, double c, double z) {
  if (!(std::fabs(z) < 1)) throw DomainError("hypergeometric series needs |z| < 1");
  if (is_nonpositive_integer(c)) throw DomainError("hyp2f1: c is a non-positive integer");
  long double sum = 1, term = 1;
  for (int k = 0; k < 200000; ++k) {
    term *= static_cast<long double>(a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    sum += term;
    if (term == 0) return static_cast<double>(sum);
    const double next_ratio = std::fabs((a + k + 1) * (b + k + 1) / ((c + k + 1) * (k + 2.0)) * z);
    if (next_ratio < 1 && std::fabs(term) * next_ratio / (1 - next_ratio) <=
                              1e-17L * std::fabs(sum)) {
      return static_cast<double>(sum);
    }
  }
  throw DomainError("hypergeometric series did not converge");
}

double hyp2f1_one_minus_z(double a, double b, double c, double z) {
  if (!(z > 0 && z < 1)) throw DomainError("connection formula needs 0 < z < 1");
  const double d = c - a - b;
  const double m = std::round(d);
  const double eps = d - m;
  if (std::fabs(m) > 1e6) return connection_generic(a, b, c, z);
  if (eps == 0) return integer_gap_any_sign(a, b, static_cast<int>(m), z);
  if (std::fabs(eps) < 1e-4) {
    // Near-integer gap: quartic interpolation in c through the exact integer case.
    constexpr double h = 1e-3;
    const double c0 = c - eps;
    const std::array<double, 5> nodes = {-2 * h, -h, 0.0, h, 2 * h};
    double result = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double g = nodes[i] == 0.0 ? integer_gap_any_sign(a, b, static_cast<int>(m), z)
                                       : connection_generic(a, b, c0 + nodes[i], z);
      double weight = 1;
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        if (j != i) weight *= (eps - nodes[j]) / (nodes[i] - nodes[j]);
      }
      result += weight * g;
    }
    return result;
  }
  return connection_generic(a, b, c, z);
}

}  // namespace detail

double hyp2f1(double a, double b, double c, double z) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(z)) {
    throw DomainError("hyp2f1: non-finite argument");
  }
  if (is_nonpositive_integer(c)) throw DomainError("hyp2f1: c is a non-positive integer");
  if (a == 0 || b == 0 || z == 0) return 1.0;
  if (is_nonpositive_integer(a) || is_nonpositive_integer(b)) return terminating(a, b, c, z);
  if (z > 1) throw DomainError("hyp2f1: z > 1 lies on the branch cut");
  if (z == 1) {
    const double d = c - a - b;
    if (!(d > 0)) throw DomainError("hyp2f1: series diverges at z = 1 when c - a - b <= 0");
    return gamma_ratio({c, d}, {c - a, c - b});
  }
  if (std::fabs(z) <= 0.5) return detail::hyp2f1_series(a, b, c, z);
  if (z < -0.5) {
    // Pfaff: maps z < -1/2 into (1/3, 1).
    return std::pow(1.0 - z, -a) * hyp2f1(a, c - b, c, z / (z - 1.0));
  }
  return detail::hyp2f1_one_minus_z(a, b, c, z);
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
  std::function<double(double)> f;
};

struct Interval {
  double a;
  double b;
  double value;
  double error;
  int depth;
  std::size_t piece;
  bool operator<(const Interval& o) const { return error < o.error; }
};

void evaluate(const std::function<double(double)>& f, Interval& iv) {
  const double center = 0.5 * (iv.a + iv.b);
  const double half = 0.5 * (iv.b - iv.a);
  auto eval = [&](double x) {
    const double y = f(x);
    if (!std::isfinite(y)) throw DomainError("integrand is not finite at " + std::to_string(x));
    return y;
  };
  const double fc = eval(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double sum = eval(center - dx) + eval(center + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  iv.value = kronrod * half;
  iv.error = std::fabs((kronrod - gauss) * half);
}

}  // namespace

QuadratureResult integrate_detailed(const QuadratureSpec& spec) {
  if (!spec.integrand) throw DomainError("quadrature: missing integrand");
  if (!(spec.lower < spec.upper)) throw DomainError("quadrature: lower must be below upper");
  if (!(spec.rel_tol > 0) && !(spec.abs_tol > 0)) throw DomainError("quadrature: tolerance must be positive");
  for (const auto& p : {spec.lower_exponent, spec.upper_exponent}) {
    if (p && !(*p > -1)) throw DomainError("quadrature: endpoint exponent must exceed -1");
  }

  std::vector<double> points{spec.lower};
  for (double x : spec.breakpoints) {
    if (x > spec.lower && x < spec.upper) points.push_back(x);
  }
  std::sort(points.begin() + 1, points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  const bool lower_sub = spec.lower_exponent && *spec.lower_exponent < 0;
  const bool upper_sub = spec.upper_exponent && *spec.upper_exponent < 0;
  if (points.size() == 1 && lower_sub && upper_sub) points.push_back(0.5 * (spec.lower + spec.upper));
  points.push_back(spec.upper);

  std::vector<Piece> pieces;
  std::priority_queue<Interval> queue;
  const std::size_t n_seg = points.size() - 1;
  for (std::size_t i = 0; i < n_seg; ++i) {
    const double left = points[i];
    const double right = points[i + 1];
    Interval iv{left, right, 0, 0, 0, pieces.size()};
    const auto& f = spec.integrand;
    if (i == 0 && lower_sub) {
      // x = left + u^beta removes a |x - left|^p endpoint singularity.
      const double beta = 1.0 / (1.0 + *spec.lower_exponent);
      pieces.push_back({[f, left, beta](double u) {
        return f(left + std::pow(u, beta)) * beta * std::pow(u, beta - 1.0);
      }});
      iv.a = 0;
      iv.b = std::pow(right - left, 1.0 / beta);
    } else if (i + 1 == n_seg && upper_sub) {
      const double beta = 1.0 / (1.0 + *spec.upper_exponent);
      pieces.push_back({[f, right, beta](double u) {
        return f(right - std::pow(u, beta)) * beta * std::pow(u, beta - 1.0);
      }});
      iv.a = 0;
      iv.b = std::pow(right - left, 1.0 / beta);
    } else {
      pieces.push_back({f});
    }
    evaluate(pieces.back().f, iv);
    queue.push(iv);
  }

  std::vector<Interval> settled;  // intervals too narrow to split further
  auto totals = [&](double& value, double& error) {
    long double v = 0, e = 0;
    auto copy = queue;
    while (!copy.empty()) {
      v += copy.top().value;
      e += copy.top().error;
      copy.pop();
    }
    for (const auto& s : settled) {
      v += s.value;
      e += s.error;
    }
    value = static_cast<double>(v);
    error = static_cast<double>(e);
  };

  QuadratureResult result;
  long double value = 0, error = 0;
  {
    double v, e;
    totals(v, e);
    value = v;
    error = e;
  }
  std::size_t count = queue.size();
  int max_depth = 0;
  for (;;) {
    const double target = std::max(spec.abs_tol, spec.rel_tol * std::fabs(static_cast<double>(value)));
    if (error <= target || queue.empty()) break;
    if (count >= spec.max_intervals) {
      double v, e;
      totals(v, e);
      throw QuadratureError("quadrature did not reach tolerance within " +
                                std::to_string(spec.max_intervals) + " intervals",
                            v, e);
    }
    Interval iv = queue.top();
    queue.pop();
    const double mid = 0.5 * (iv.a + iv.b);
    if (!(mid > iv.a && mid < iv.b) ||
        (iv.b - iv.a) < 64 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(mid))) {
      settled.push_back(iv);
      continue;
    }
    Interval left{iv.a, mid, 0, 0, iv.depth + 1, iv.piece};
    Interval right{mid, iv.b, 0, 0, iv.depth + 1, iv.piece};
    evaluate(pieces[iv.piece].f, left);
    evaluate(pieces[iv.piece].f, right);
    value += left.value + right.value - iv.value;
    error += left.error + right.error - iv.error;
    max_depth = std::max(max_depth, iv.depth + 1);
    queue.push(left);
    queue.push(right);
    ++count;
    if (error < 0) {
      double v, e;
      totals(v, e);
      value = v;
      error = e;
    }
  }
  double v, e;
  totals(v, e);
  const double target = std::max(spec.abs_tol, spec.rel_tol * std::fabs(v));
  if (e > target) {
    throw QuadratureError("quadrature stalled at the resolution limit", v, e);
  }
  result.value = v;
  result.error = e;
  result.intervals = count;
  result.max_depth = max_depth;
  return result;
}

double integrate(const QuadratureSpec& spec) { return integrate_detailed(spec).value; }

}  // namespace mimpact
