#pragma once

#include <vector>

namespace mimpact {

/// Latent book profile V(x) = x^n e^{bx} / (Y * integral_0^1 y^n e^{by} dy).
struct BookParams {
  double y_norm = 1;
  double b = 1;
  double n = 0;

  double c() const;
  void validate() const;
};

/// Precomputed cumulative depth for repeated inversion.
class LatentBook {
 public:
  static constexpr int kGridPoints = 10000;

  explicit LatentBook(const BookParams& p);

  const BookParams& params() const { return p_; }
  /// Total depth up to unit offset, 1 / Y.
  double capacity() const { return 1.0 / p_.y_norm; }
  double profile(double x) const;
  /// integral_0^x V.
  double cumulative(double x) const;
  /// Impact I with cumulative(I) = pi. Throws SaturationError above capacity.
  double invert(double pi) const;

 private:
  double raw_cumulative(double x) const;

  BookParams p_;
  double norm_ = 1;  // integral_0^1 y^n e^{by} dy
  std::vector<double> table_;
};

double book_profile(const BookParams& p, double x);
double invert_impact(const BookParams& p, double pi);

/// Logarithmic closed form Y log(1 + c pi) / log(1 + c), c = e^b - 1.
double impact_log_closed(double y_norm, double b, double pi);

}  // namespace mimpact
