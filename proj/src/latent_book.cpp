#include "mimpact/latent_book.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mimpact/errors.hpp"
#include "mimpact/special_fn.hpp"

namespace mimpact {

double BookParams::c() const { return std::expm1(b); }

void BookParams::validate() const {
  if (!(y_norm > 0)) throw DomainError("latent book: Y must be positive");
  if (!(b > 0) || !std::isfinite(b)) throw DomainError("latent book: b must be positive");
  if (!(n >= 0) || !std::isfinite(n)) throw DomainError("latent book: n must be non-negative");
  if (b > 600) throw DomainError("latent book: b too large for the depth series");
}

namespace {

double profile_denominator(const BookParams& p) {
  if (p.n == 0) return std::expm1(p.b) / p.b;
  QuadratureSpec spec;
  spec.integrand = [&](double y) { return std::pow(y, p.n) * std::exp(p.b * y); };
  spec.rel_tol = 1e-13;
  return integrate(spec);
}

}  // namespace

LatentBook::LatentBook(const BookParams& p) : p_(p) {
  p_.validate();
  norm_ = raw_cumulative(1.0);
  table_.resize(kGridPoints + 1);
  for (int i = 0; i <= kGridPoints; ++i) {
    table_[i] = raw_cumulative(static_cast<double>(i) / kGridPoints) / (p_.y_norm * norm_);
  }
  table_.back() = capacity();
}

// sum_k b^k x^{n+k+1} / (k! (n+k+1)); every term is positive.
double LatentBook::raw_cumulative(double x) const {
  if (x <= 0) return 0;
  const double bx = p_.b * x;
  double power = std::pow(x, p_.n + 1);  // x^{n+1} b^k x^k / k!
  double sum = 0;
  for (int k = 0; k < 5000; ++k) {
    const double term = power / (p_.n + k + 1);
    sum += term;
    if (k > bx && term <= 1e-17 * sum) break;
    power *= bx / (k + 1);
  }
  return sum;
}

double LatentBook::profile(double x) const {
  if (!(x >= 0 && x <= 1)) throw DomainError("latent book: offset outside [0, 1]");
  return std::pow(x, p_.n) * std::exp(p_.b * x) / (p_.y_norm * norm_);
}

double LatentBook::cumulative(double x) const {
  if (!(x >= 0 && x <= 1)) throw DomainError("latent book: offset outside [0, 1]");
  return raw_cumulative(x) / (p_.y_norm * norm_);
}

double LatentBook::invert(double pi) const {
  if (!(pi >= 0)) throw DomainError("latent book: pi must be non-negative");
  const double cap = capacity();
  if (pi > cap * (1 + 1e-12)) {
    throw SaturationError("latent book saturated: pi = " + std::to_string(pi) +
                              " exceeds capacity " + std::to_string(cap),
                          cap);
  }
  if (pi == 0) return 0;
  if (pi >= cap) return 1;
  const auto it = std::upper_bound(table_.begin(), table_.end(), pi);
  const auto i = static_cast<int>(it - table_.begin());
  double lo = static_cast<double>(i - 1) / kGridPoints;
  double hi = static_cast<double>(std::min(i, kGridPoints)) / kGridPoints;
  double flo = table_[i - 1] - pi;
  double fhi = table_[std::min(i, kGridPoints)] - pi;
  // Monotone interpolation inside the cell seeds Newton; bisection guards it.
  double x = fhi > flo ? lo - flo * (hi - lo) / (fhi - flo) : 0.5 * (lo + hi);
  for (int iter = 0; iter < 100; ++iter) {
    const double fx = cumulative(x) - pi;
    if (fx == 0) return x;
    if (fx < 0) {
      lo = x;
    } else {
      hi = x;
    }
    const double slope = std::pow(x, p_.n) * std::exp(p_.b * x) / (p_.y_norm * norm_);
    double next = slope > 0 ? x - fx / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= 1e-16 * std::max(1e-300, x) || hi - lo <= 1e-16 * hi) return next;
    x = next;
  }
  return x;
}

double book_profile(const BookParams& p, double x) {
  p.validate();
  if (!(x >= 0 && x <= 1)) throw DomainError("latent book: offset outside [0, 1]");
  return std::pow(x, p.n) * std::exp(p.b * x) / (p.y_norm * profile_denominator(p));
}

double invert_impact(const BookParams& p, double pi) { return LatentBook(p).invert(pi); }

double impact_log_closed(double y_norm, double b, double pi) {
  if (!(pi >= 0)) throw DomainError("log impact: pi must be non-negative");
  if (!(b > 0)) throw DomainError("log impact: b must be positive");
  const double c = std::expm1(b);
  return y_norm * std::log1p(c * pi) / std::log1p(c);
}

}  // namespace mimpact
