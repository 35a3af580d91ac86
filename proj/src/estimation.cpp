#include "mimpact/estimation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <Eigen/Dense>

#include "mimpact/errors.hpp"

namespace mimpact {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

CurveRow finish_row(const std::vector<double>& xs, const std::vector<double>& ys) {
  CurveRow row;
  row.count = xs.size();
  const double n = static_cast<double>(xs.size());
  long double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  row.x = static_cast<double>(sx / n);
  row.y = static_cast<double>(sy / n);
  long double ss = 0;
  for (double y : ys) ss += (y - row.y) * static_cast<long double>(y - row.y);
  row.se = xs.size() >= 2 ? std::sqrt(static_cast<double>(ss) / (n - 1) / n) : 0.0;
  return row;
}

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

// Ordinary least squares of log y on log inputs; returns intercept then slopes.
std::optional<std::vector<double>> loglog_ols(const BinnedCurve& curve, bool two_inputs) {
  const int k = two_inputs ? 3 : 2;
  std::vector<std::array<double, 3>> rows;
  std::vector<double> targets;
  for (const auto& r : curve.rows) {
    if (r.x > 0 && r.y > 0 && (!two_inputs || r.x2 > 0)) {
      rows.push_back({1.0, std::log(r.x), two_inputs ? std::log(r.x2) : 0.0});
      targets.push_back(std::log(r.y));
    }
  }
  if (static_cast<int>(rows.size()) < k) return std::nullopt;
  Eigen::MatrixXd a(rows.size(), k);
  Eigen::VectorXd b(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < k; ++j) a(static_cast<Eigen::Index>(i), j) = rows[i][j];
    b(static_cast<Eigen::Index>(i)) = targets[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < k) return std::nullopt;
  const Eigen::VectorXd sol = qr.solve(b);
  return std::vector<double>(sol.data(), sol.data() + k);
}

}  // namespace

double FitResult::param(const std::string& name) const {
  for (std::size_t i = 0; i < param_names.size(); ++i) {
    if (param_names[i] == name) return params[i];
  }
  throw DomainError("fit has no parameter '" + name + "'");
}

std::vector<int> equal_count_bins(std::span<const double> values, int n_bins) {
  if (n_bins < 1) throw DomainError("equal_count_bins: need at least one bin");
  const std::size_t n = values.size();
  if (n < static_cast<std::size_t>(n_bins)) {
    throw DomainError("equal_count_bins: more bins (" + std::to_string(n_bins) + ") than values (" +
                      std::to_string(n) + ")");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const std::size_t base = n / static_cast<std::size_t>(n_bins);
  const std::size_t rem = n % static_cast<std::size_t>(n_bins);
  std::vector<int> out(n);
  std::size_t pos = 0;
  for (int b = 0; b < n_bins; ++b) {
    const std::size_t size = base + (static_cast<std::size_t>(b) < rem ? 1 : 0);
    for (std::size_t k = 0; k < size; ++k) out[order[pos++]] = b;
  }
  return out;
}

BinnedCurve impact_curve(std::span<const double> x, std::span<const double> impact, int n_bins) {
  if (x.size() != impact.size()) throw DomainError("impact_curve: size mismatch");
  const auto bins = equal_count_bins(x, n_bins);
  std::vector<std::vector<double>> bx(static_cast<std::size_t>(n_bins));
  std::vector<std::vector<double>> by(static_cast<std::size_t>(n_bins));
  for (std::size_t i = 0; i < x.size(); ++i) {
    bx[static_cast<std::size_t>(bins[i])].push_back(x[i]);
    by[static_cast<std::size_t>(bins[i])].push_back(impact[i]);
  }
  BinnedCurve curve;
  for (int b = 0; b < n_bins; ++b) {
    const auto& xs = bx[static_cast<std::size_t>(b)];
    if (xs.size() < 2) {
      curve.warnings.push_back("bin " + std::to_string(b) + " has fewer than 2 samples; dropped");
      continue;
    }
    curve.rows.push_back(finish_row(xs, by[static_cast<std::size_t>(b)]));
  }
  return curve;
}

BinnedCurve impact_curve_with_edges(std::span<const double> x, std::span<const double> impact,
                                    std::span<const double> edges) {
  if (x.size() != impact.size()) throw DomainError("impact_curve: size mismatch");
  if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end())) {
    throw DomainError("impact_curve: edges must be sorted with at least two entries");
  }
  const std::size_t n_bins = edges.size() - 1;
  std::vector<std::vector<double>> bx(n_bins), by(n_bins);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < edges.front() || x[i] > edges.back()) continue;
    auto it = std::upper_bound(edges.begin(), edges.end(), x[i]);
    std::size_t b = static_cast<std::size_t>(it - edges.begin());
    b = std::min(b == 0 ? 0 : b - 1, n_bins - 1);
    bx[b].push_back(x[i]);
    by[b].push_back(impact[i]);
  }
  BinnedCurve curve;
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (bx[b].size() < 2) {
      curve.warnings.push_back("bin " + std::to_string(b) + " has fewer than 2 samples; dropped");
      continue;
    }
    curve.rows.push_back(finish_row(bx[b], by[b]));
  }
  return curve;
}

std::vector<double> default_init(Family f, const BinnedCurve& curve) {
  if (curve.rows.empty()) throw DomainError("default_init: empty curve");
  std::vector<double> xs, x2s, ys;
  for (const auto& r : curve.rows) {
    xs.push_back(r.x);
    x2s.push_back(r.x2);
    ys.push_back(r.y);
  }
  const double y_max = *std::max_element(ys.begin(), ys.end());
  const double y_scale = y_max > 0 ? y_max : 1.0;
  const double x_med = median(xs);
  const double x_max = *std::max_element(xs.begin(), xs.end());
  switch (f) {
    case Family::constant:
      return {std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size())};
    case Family::power: {
      if (auto sol = loglog_ols(curve, false)) return {std::exp((*sol)[0]), (*sol)[1]};
      return {y_scale, 0.5};
    }
    case Family::log:
      return {y_scale, x_med > 0 ? 1.0 / x_med : 1.0};
    case Family::double_power: {
      if (auto sol = loglog_ols(curve, true)) return {std::exp((*sol)[0]), (*sol)[1], (*sol)[2]};
      return {y_scale, 0.5, 0.5};
    }
    case Family::double_log: {
      const double f_med = median(x2s);
      return {y_scale, x_med > 0 ? 1.0 / x_med : 1.0, f_med > 0 ? 1.0 / f_med : 1.0};
    }
    case Family::book_n0:
      return {y_scale, x_med > 0 ? std::log1p(1.0 / x_med) : 1.0};
    case Family::book_n1:
      return {x_max > 0 ? 0.5 / x_max : 1.0, 1.0};
    case Family::book_n:
      return {x_max > 0 ? 0.5 / x_max : 1.0, 1.0, 1.0};
  }
  return {};
}

double e_rms(Family f, std::span<const double> params, const BinnedCurve& curve) {
  if (curve.rows.empty()) throw DomainError("e_rms: empty curve");
  std::vector<double> x1, x2;
  for (std::size_t i = 0; i < curve.rows.size(); ++i) {
    const auto& r = curve.rows[i];
    if (!(r.se > 0)) {
      throw DomainError("e_rms: row " + std::to_string(i) +
                        " has zero standard error; drop it before computing E_RMS");
    }
    x1.push_back(r.x);
    x2.push_back(r.x2);
  }
  const auto g = family_predict(f, params, x1, x2);
  long double sum = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) throw DomainError("e_rms: model undefined at row " + std::to_string(i));
    const double r = (curve.rows[i].y - g[i]) / curve.rows[i].se;
    sum += static_cast<long double>(r) * r;
  }
  return std::sqrt(static_cast<double>(sum / static_cast<long double>(g.size())));
}

FitResult weighted_nls(Family f, const BinnedCurve& curve) {
  return weighted_nls(f, curve, default_init(f, curve));
}

FitResult weighted_nls(Family f, const BinnedCurve& curve, std::vector<double> init,
                       const FitOptions& opts) {
  const auto& info = family_info(f);
  const auto n_params = static_cast<Eigen::Index>(info.param_names.size());
  const auto n_rows = static_cast<Eigen::Index>(curve.rows.size());
  if (static_cast<Eigen::Index>(init.size()) != n_params) {
    throw DomainError("weighted_nls: expected " + std::to_string(n_params) + " initial values");
  }
  if (n_rows < n_params) throw FitError("weighted_nls: fewer rows than parameters", {});
  if (!family_params_valid(f, init)) throw DomainError("weighted_nls: initial values outside the family domain");
  std::vector<double> x1, x2;
  for (std::size_t i = 0; i < curve.rows.size(); ++i) {
    if (!(curve.rows[i].se > 0)) {
      throw DomainError("weighted_nls: row " + std::to_string(i) + " has zero standard error");
    }
    x1.push_back(curve.rows[i].x);
    x2.push_back(curve.rows[i].x2);
  }

  auto residuals = [&](const std::vector<double>& p, Eigen::VectorXd& r) {
    if (!family_params_valid(f, p)) return false;
    const auto g = family_predict(f, p, x1, x2);
    r.resize(n_rows);
    for (Eigen::Index i = 0; i < n_rows; ++i) {
      const auto& row = curve.rows[static_cast<std::size_t>(i)];
      r(i) = (row.y - g[static_cast<std::size_t>(i)]) / row.se;
      if (!std::isfinite(r(i))) return false;
    }
    return true;
  };
  auto jacobian = [&](const std::vector<double>& p, const Eigen::VectorXd& r0, Eigen::MatrixXd& jac) {
    jac.resize(n_rows, n_params);
    Eigen::VectorXd r1;
    for (Eigen::Index j = 0; j < n_params; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      double h = 1e-7 * std::max(std::fabs(p[ju]), 1e-4);
      auto q = p;
      q[ju] = p[ju] + h;
      if (!residuals(q, r1)) {
        h = -h;
        q[ju] = p[ju] + h;
        if (!residuals(q, r1)) return false;
      }
      jac.col(j) = (r1 - r0) / h;
    }
    return true;
  };

  std::vector<double> p = std::move(init);
  Eigen::VectorXd r;
  if (!residuals(p, r)) throw DomainError("weighted_nls: model undefined at the initial values");
  double chi2 = r.squaredNorm();
  FitResult result;
  result.family = f;
  result.param_names = info.param_names;
  double mu = 1e-3;
  bool converged = chi2 == 0;
  int iter = 0;
  Eigen::MatrixXd jac;
  while (!converged && iter < opts.max_iterations) {
    ++iter;
    if (!jacobian(p, r, jac)) throw FitError("weighted_nls: Jacobian undefined", result.trace);
    const Eigen::MatrixXd a = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    const double diag_floor = 1e-12 * std::max(a.diagonal().maxCoeff(), 1e-300);
    bool accepted = false;
    Eigen::VectorXd step;
    for (int tries = 0; tries < 60; ++tries) {
      Eigen::MatrixXd m = a;
      for (Eigen::Index j = 0; j < n_params; ++j) m(j, j) += mu * std::max(a(j, j), diag_floor);
      step = m.ldlt().solve(-g);
      if (!step.allFinite()) {
        mu *= 4;
        continue;
      }
      std::vector<double> trial(p);
      for (Eigen::Index j = 0; j < n_params; ++j) trial[static_cast<std::size_t>(j)] += step(j);
      Eigen::VectorXd r_trial;
      if (residuals(trial, r_trial)) {
        const double chi2_trial = r_trial.squaredNorm();
        if (chi2_trial < chi2) {
          p = std::move(trial);
          r = std::move(r_trial);
          chi2 = chi2_trial;
          mu = std::max(mu / 3, 1e-15);
          accepted = true;
          break;
        }
      }
      mu *= 4;
      if (mu > 1e16) break;
    }
    if (!accepted) {
      // No descent direction improves chi2: a minimum to working precision.
      converged = true;
      break;
    }
    result.trace.push_back(chi2);
    bool small = true;
    for (Eigen::Index j = 0; j < n_params; ++j) {
      if (std::fabs(step(j)) > opts.step_tol * (std::fabs(p[static_cast<std::size_t>(j)]) + opts.step_tol)) {
        small = false;
      }
    }
    if (small || chi2 == 0) converged = true;
  }
  if (!converged) {
    throw FitError("weighted_nls: no convergence within " + std::to_string(opts.max_iterations) +
                       " iterations",
                   result.trace);
  }
  if (!jacobian(p, r, jac)) throw FitError("weighted_nls: Jacobian undefined at the optimum", result.trace);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv(sv.size() - 1) > 1e-12 * sv(0))) {
    throw FitError("weighted_nls: singular Jacobian", result.trace);
  }
  const Eigen::MatrixXd cov = (jac.transpose() * jac).inverse();
  result.params = p;
  result.std_errors.resize(static_cast<std::size_t>(n_params));
  for (Eigen::Index j = 0; j < n_params; ++j) {
    result.std_errors[static_cast<std::size_t>(j)] = std::sqrt(std::max(cov(j, j), 0.0));
  }
  result.chi2 = chi2;
  result.n_points = static_cast<std::size_t>(n_rows);
  result.iterations = iter;
  result.e_rms = std::sqrt(chi2 / static_cast<double>(n_rows));
  return result;
}

// ---------------------------------------------------------------------------

BinnedCurve SurfaceGrid::as_curve() const {
  BinnedCurve curve;
  for (const auto& c : cells) {
    if (c.empty() || !(c.impact_se > 0)) continue;
    curve.rows.push_back(CurveRow{c.eta_mean, c.f_mean, c.impact_mean, c.impact_se, c.count});
  }
  return curve;
}

SurfaceGrid surface_grid(std::span<const SurfaceSample> samples, int n_eta, int n_f) {
  std::vector<double> etas, fs, ys;
  for (const auto& s : samples) {
    etas.push_back(s.eta);
    fs.push_back(s.f);
    ys.push_back(s.impact);
  }
  const auto be = equal_count_bins(etas, n_eta);
  const auto bf = equal_count_bins(fs, n_f);
  SurfaceGrid grid;
  grid.n_eta = n_eta;
  grid.n_f = n_f;
  auto edges = [](const std::vector<double>& values, const std::vector<int>& bins, int n) {
    std::vector<double> lo(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < values.size(); ++i) {
      auto& l = lo[static_cast<std::size_t>(bins[i])];
      l = std::min(l, values[i]);
      hi = std::max(hi, values[i]);
    }
    lo.push_back(hi);
    return lo;
  };
  grid.eta_edges = edges(etas, be, n_eta);
  grid.f_edges = edges(fs, bf, n_f);
  std::vector<std::vector<double>> cx(static_cast<std::size_t>(n_eta * n_f)), cf(cx.size()), cy(cx.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto k = static_cast<std::size_t>(be[i] * n_f + bf[i]);
    cx[k].push_back(etas[i]);
    cf[k].push_back(fs[i]);
    cy[k].push_back(ys[i]);
  }
  grid.cells.resize(cx.size());
  for (std::size_t k = 0; k < cx.size(); ++k) {
    auto& cell = grid.cells[k];
    cell.count = cx[k].size();
    if (cell.count == 0) continue;
    const auto row = finish_row(cx[k], cy[k]);
    cell.eta_mean = row.x;
    cell.impact_mean = row.y;
    cell.impact_se = row.se;
    cell.f_mean = std::accumulate(cf[k].begin(), cf[k].end(), 0.0) / static_cast<double>(cell.count);
  }
  return grid;
}

SurfaceFit fit_surface(std::span<const SurfaceSample> samples, int n_eta, int n_f, Family family) {
  if (family_info(family).n_inputs != 2) {
    throw DomainError("fit_surface: family '" + std::string(family_info(family).name) +
                      "' is not a surface family");
  }
  SurfaceFit out;
  out.grid = surface_grid(samples, n_eta, n_f);
  out.fit = weighted_nls(family, out.grid.as_curve());
  return out;
}

std::vector<double> residual_map(const FitResult& fit, const SurfaceGrid& grid) {
  std::vector<double> out(grid.cells.size(), kNaN);
  for (std::size_t k = 0; k < grid.cells.size(); ++k) {
    const auto& c = grid.cells[k];
    if (c.empty() || !(c.impact_se > 0)) continue;
    const double g = family_eval(fit.family, fit.params, c.eta_mean, c.f_mean);
    out[k] = (c.impact_mean - g) / c.impact_se;
  }
  return out;
}

LocalExponentMap local_exponent_map(std::span<const SurfaceSample> samples, int n1, int n2,
                                    int window) {
  if (window < 1) throw DomainError("local_exponent_map: window must be positive");
  LocalExponentMap out;
  out.grid = surface_grid(samples, n1, n2);
  out.cells.resize(out.grid.cells.size());
  const int below = (window - 1) / 2;
  const int above = window / 2;
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      auto& cell = out.cells[static_cast<std::size_t>(i * n2 + j)];
      BinnedCurve local;
      std::vector<int> rows_i, cols_j;
      for (int a = std::max(0, i - below); a <= std::min(n1 - 1, i + above); ++a) {
        for (int b = std::max(0, j - below); b <= std::min(n2 - 1, j + above); ++b) {
          const auto& c = out.grid.at(a, b);
          if (c.empty() || !(c.impact_se > 0)) continue;
          local.rows.push_back(CurveRow{c.eta_mean, c.f_mean, c.impact_mean, c.impact_se, c.count});
          rows_i.push_back(a);
          cols_j.push_back(b);
        }
      }
      std::sort(rows_i.begin(), rows_i.end());
      std::sort(cols_j.begin(), cols_j.end());
      const auto distinct_i = std::unique(rows_i.begin(), rows_i.end()) - rows_i.begin();
      const auto distinct_j = std::unique(cols_j.begin(), cols_j.end()) - cols_j.begin();
      if (local.rows.size() < 4 || distinct_i < 2 || distinct_j < 2) {
        cell.flagged = true;
        continue;
      }
      try {
        const auto fit = weighted_nls(Family::double_power, local);
        cell.delta = fit.params[1];
        cell.gamma1 = fit.params[2];
      } catch (const std::exception&) {
        cell.flagged = true;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

double OrderPath::at(double elapsed) const {
  if (v.empty() || elapsed < v.front() || elapsed > v.back()) return kNaN;
  const auto it = std::upper_bound(v.begin(), v.end(), elapsed);
  if (it == v.end()) return impact.back();
  const auto i = static_cast<std::size_t>(it - v.begin());
  const double w = (elapsed - v[i - 1]) / (v[i] - v[i - 1]);
  return impact[i - 1] + w * (impact[i] - impact[i - 1]);
}

std::vector<TrajectoryCurve> trajectory_curves(std::span<const OrderPath> paths, double eta_lo,
                                               double eta_hi, std::span<const double> f_edges,
                                               int n_points) {
  if (f_edges.size() < 2) throw DomainError("trajectory_curves: need at least two F edges");
  if (n_points < 2) throw DomainError("trajectory_curves: need at least two grid points");
  std::vector<TrajectoryCurve> out;
  for (std::size_t b = 0; b + 1 < f_edges.size(); ++b) {
    TrajectoryCurve curve;
    curve.f_lo = f_edges[b];
    curve.f_hi = f_edges[b + 1];
    std::vector<const OrderPath*> members;
    for (const auto& p : paths) {
      if (p.eta >= eta_lo && p.eta < eta_hi && p.duration_f >= curve.f_lo && p.duration_f < curve.f_hi) {
        members.push_back(&p);
      }
    }
    if (members.empty()) continue;
    curve.count = members.size();
    for (int k = 0; k < n_points; ++k) {
      const double v = curve.f_lo * k / (n_points - 1);
      std::vector<double> vals;
      for (const auto* m : members) vals.push_back(m->at(v));
      const auto row = finish_row(vals, vals);
      curve.v.push_back(v);
      curve.mean.push_back(row.y);
      curve.se.push_back(row.se);
    }
    std::vector<double> fs, temps;
    for (const auto* m : members) {
      fs.push_back(m->duration_f);
      temps.push_back(m->at(m->duration_f));
    }
    const auto marker = finish_row(fs, temps);
    curve.marker_f = marker.x;
    curve.marker_impact = marker.y;
    curve.marker_se = marker.se;
    out.push_back(std::move(curve));
  }
  return out;
}

std::vector<DecayCurve> decay_curves(std::span<const OrderPath> paths,
                                     std::span<const double> eta_edges,
                                     std::span<const double> f_edges, const DecayOptions& opts) {
  if (eta_edges.size() < 2 || f_edges.size() < 2) throw DomainError("decay_curves: need bin edges");
  if (!(opts.horizon_multiple >= 1) || opts.points_per_unit < 1) {
    throw DomainError("decay_curves: invalid z grid");
  }
  const int n_z = static_cast<int>(std::lround(opts.horizon_multiple * opts.points_per_unit));
  const int k_one = opts.points_per_unit;
  std::vector<DecayCurve> out;
  for (std::size_t ie = 0; ie + 1 < eta_edges.size(); ++ie) {
    for (std::size_t jf = 0; jf + 1 < f_edges.size(); ++jf) {
      DecayCurve curve;
      curve.eta_lo = eta_edges[ie];
      curve.eta_hi = eta_edges[ie + 1];
      curve.f_lo = f_edges[jf];
      curve.f_hi = f_edges[jf + 1];
      const bool last_eta = ie + 2 == eta_edges.size();
      const bool last_f = jf + 2 == f_edges.size();
      std::vector<std::vector<double>> values;  // per order, I(z_k) for k = 1..n_z
      for (const auto& p : paths) {
        const bool in_eta = p.eta >= curve.eta_lo && (p.eta < curve.eta_hi || (last_eta && p.eta == curve.eta_hi));
        const bool in_f = p.duration_f >= curve.f_lo &&
                          (p.duration_f < curve.f_hi || (last_f && p.duration_f == curve.f_hi));
        if (!in_eta || !in_f) continue;
        if (p.crosses_day && !opts.cross_day) {
          ++curve.excluded_cross_day;
          continue;
        }
        const double i1 = p.at(p.duration_f);
        if (!std::isfinite(i1) || std::fabs(i1) < opts.min_abs_temporary) {
          ++curve.excluded_small;
          continue;
        }
        if (p.v.empty() || p.v.back() < opts.horizon_multiple * p.duration_f * (1 - 1e-12)) {
          ++curve.excluded_short;
          continue;
        }
        std::vector<double> row(static_cast<std::size_t>(n_z));
        for (int k = 1; k <= n_z; ++k) {
          const double z = static_cast<double>(k) / opts.points_per_unit;
          row[static_cast<std::size_t>(k - 1)] =
              k == k_one ? i1 : p.at(std::min(z * p.duration_f, p.v.back()));
        }
        values.push_back(std::move(row));
      }
      curve.n_orders = values.size();
      if (values.empty()) continue;
      const double n = static_cast<double>(values.size());
      long double sum_one = 0;
      for (const auto& row : values) sum_one += row[static_cast<std::size_t>(k_one - 1)];
      const double mean_one = static_cast<double>(sum_one / n);
      for (int k = 1; k <= n_z; ++k) {
        const auto kk = static_cast<std::size_t>(k - 1);
        long double sum = 0;
        for (const auto& row : values) sum += row[kk];
        const double ratio = static_cast<double>(sum / sum_one);
        // Ratio-estimator standard error.
        long double ss = 0;
        for (const auto& row : values) {
          const double d = row[kk] - ratio * row[static_cast<std::size_t>(k_one - 1)];
          ss += static_cast<long double>(d) * d;
        }
        const double se = values.size() >= 2
                              ? std::sqrt(static_cast<double>(ss) / (n - 1) / n) / std::fabs(mean_one)
                              : kNaN;
        curve.z_grid.push_back(static_cast<double>(k) / opts.points_per_unit);
        curve.i_ren.push_back(ratio);
        curve.se.push_back(se);
      }
      out.push_back(std::move(curve));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> default_overlap_bins() { return {0, 10, 25, 50, 100, 200, 390}; }

std::vector<OverlapRow> overlap_stats(std::span<const Metaorder> orders, double horizon_multiple,
                                      std::span<const double> duration_bins) {
  std::vector<double> bins(duration_bins.begin(), duration_bins.end());
  if (bins.empty()) bins = default_overlap_bins();
  if (bins.size() < 2 || !std::is_sorted(bins.begin(), bins.end())) {
    throw DomainError("overlap_stats: duration bins must be sorted with at least two edges");
  }
  if (!(horizon_multiple > 0)) throw DomainError("overlap_stats: horizon multiple must be positive");
  std::map<DayKey, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < orders.size(); ++i) {
    groups[DayKey{orders[i].symbol, orders[i].date}].push_back(i);
  }
  const std::size_t n_bins = bins.size() - 1;
  std::vector<OverlapRow> rows(n_bins + 1);
  std::vector<std::size_t> same(n_bins + 1, 0);
  for (std::size_t b = 0; b < n_bins; ++b) {
    rows[b].lo_minutes = bins[b];
    rows[b].hi_minutes = bins[b + 1];
  }
  rows[n_bins].lo_minutes = bins.front();
  rows[n_bins].hi_minutes = bins.back();
  for (const auto& [key, members] : groups) {
    for (std::size_t i : members) {
      const auto& o = orders[i];
      const double dur = o.duration_minutes();
      if (dur < bins.front() || dur > bins.back()) continue;
      auto it = std::upper_bound(bins.begin(), bins.end(), dur);
      std::size_t b = static_cast<std::size_t>(it - bins.begin());
      b = std::min(b == 0 ? 0 : b - 1, n_bins - 1);
      const double w_start = o.start;
      const double w_end = o.start + horizon_multiple * dur;
      std::size_t overlaps = 0, same_sign = 0;
      for (std::size_t j : members) {
        if (j == i) continue;
        const auto& other = orders[j];
        if (other.start < w_end && other.end > w_start) {
          ++overlaps;
          if (other.sign == o.sign) ++same_sign;
        }
      }
      for (std::size_t r : {b, n_bins}) {
        ++rows[r].count;
        rows[r].overlaps += overlaps;
        same[r] += same_sign;
      }
    }
  }
  for (std::size_t r = 0; r <= n_bins; ++r) {
    auto& row = rows[r];
    row.mean_overlaps = row.count ? static_cast<double>(row.overlaps) / static_cast<double>(row.count) : 0;
    if (row.overlaps > 0) {
      row.same_sign_fraction = static_cast<double>(same[r]) / static_cast<double>(row.overlaps);
      row.opposite_sign_fraction = 1.0 - row.same_sign_fraction;
    }
  }
  return rows;
}

}  // namespace mimpact
