#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mimpact/core_types.hpp"
#include "mimpact/families.hpp"

namespace mimpact {

struct CurveRow {
  double x = 0;   // mean abscissa (pi, or eta for surfaces)
  double x2 = 0;  // mean F for surfaces, unused otherwise
  double y = 0;   // mean impact
  double se = 0;  // standard error of the mean
  std::size_t count = 0;
};

struct BinnedCurve {
  std::vector<CurveRow> rows;
  std::vector<std::string> warnings;
};

struct FitResult {
  Family family = Family::constant;
  std::vector<std::string> param_names;
  std::vector<double> params;
  std::vector<double> std_errors;
  double e_rms = 0;
  double chi2 = 0;
  std::size_t n_points = 0;
  int iterations = 0;
  std::vector<double> trace;  // chi2 after each accepted step

  double param(const std::string& name) const;
};

struct FitOptions {
  int max_iterations = 200;
  double step_tol = 1e-10;
};

/// Bin index per value: equal populations (differing by at most one, remainder to the
/// lowest bins), ties kept in input order.
std::vector<int> equal_count_bins(std::span<const double> values, int n_bins);

BinnedCurve impact_curve(std::span<const double> x, std::span<const double> impact, int n_bins);
/// Same statistics on fixed bin edges; values outside [edges.front(), edges.back()] are ignored.
BinnedCurve impact_curve_with_edges(std::span<const double> x, std::span<const double> impact,
                                    std::span<const double> edges);

/// Deterministic starting point for a family, derived from the data.
std::vector<double> default_init(Family f, const BinnedCurve& curve);

/// Levenberg-damped Gauss-Newton on sum(((y - g) / se)^2).
FitResult weighted_nls(Family f, const BinnedCurve& curve, std::vector<double> init,
                       const FitOptions& opts = {});
FitResult weighted_nls(Family f, const BinnedCurve& curve);

double e_rms(Family f, std::span<const double> params, const BinnedCurve& curve);

struct SurfaceCell {
  double eta_mean = 0;
  double f_mean = 0;
  double impact_mean = 0;
  double impact_se = 0;
  std::size_t count = 0;
  bool empty() const { return count < 2; }
};

struct SurfaceGrid {
  int n_eta = 0;
  int n_f = 0;
  std::vector<double> eta_edges;  // n_eta + 1
  std::vector<double> f_edges;    // n_f + 1
  std::vector<SurfaceCell> cells; // row-major, eta index first

  const SurfaceCell& at(int i, int j) const { return cells[static_cast<std::size_t>(i * n_f + j)]; }
  SurfaceCell& at(int i, int j) { return cells[static_cast<std::size_t>(i * n_f + j)]; }
  /// Non-empty cells with positive standard error as fit rows (x = eta, x2 = F).
  BinnedCurve as_curve() const;
};

struct SurfaceSample {
  double eta = 0;
  double f = 0;
  double impact = 0;
};

SurfaceGrid surface_grid(std::span<const SurfaceSample> samples, int n_eta, int n_f);

struct SurfaceFit {
  SurfaceGrid grid;
  FitResult fit;
};

SurfaceFit fit_surface(std::span<const SurfaceSample> samples, int n_eta, int n_f, Family family);

/// Standardized residual per cell, NaN for empty cells.
std::vector<double> residual_map(const FitResult& fit, const SurfaceGrid& grid);

struct LocalExponentCell {
  double delta = 0;
  double gamma1 = 0;  // fitted F exponent, 1 - gamma in propagator terms
  bool flagged = false;
};

struct LocalExponentMap {
  SurfaceGrid grid;
  std::vector<LocalExponentCell> cells;  // same layout as grid.cells
};

LocalExponentMap local_exponent_map(std::span<const SurfaceSample> samples, int n1 = 10,
                                    int n2 = 10, int window = 5);

/// Impact path of one order in volume time relative to its start.
struct OrderPath {
  double eta = 0;
  double duration_f = 0;
  double pi = 0;
  std::vector<double> v;       // elapsed volume time since the start, increasing, v[0] = 0
  std::vector<double> impact;  // signed impact
  bool crosses_day = false;

  /// Linear interpolation; NaN outside the sampled range.
  double at(double elapsed) const;
};

struct TrajectoryCurve {
  double f_lo = 0;
  double f_hi = 0;
  std::size_t count = 0;
  std::vector<double> v;
  std::vector<double> mean;
  std::vector<double> se;
  double marker_f = 0;       // mean F of the bin
  double marker_impact = 0;  // mean temporary impact of the bin
  double marker_se = 0;
};

/// Orders with eta in [eta_lo, eta_hi) grouped by F bins; each curve runs up to the
/// bin's lower F edge, where every member is still executing.
std::vector<TrajectoryCurve> trajectory_curves(std::span<const OrderPath> paths, double eta_lo,
                                               double eta_hi, std::span<const double> f_edges,
                                               int n_points = 40);

struct DecayOptions {
  double horizon_multiple = 3.0;
  int points_per_unit = 20;  // z grid k / points_per_unit
  bool cross_day = false;
  double min_abs_temporary = 1e-9;
};

struct DecayCurve {
  double eta_lo = 0;
  double eta_hi = 0;
  double f_lo = 0;
  double f_hi = 0;
  std::vector<double> z_grid;
  std::vector<double> i_ren;
  std::vector<double> se;
  std::size_t n_orders = 0;
  std::size_t excluded_small = 0;    // |I(1)| below threshold
  std::size_t excluded_short = 0;    // path shorter than the horizon
  std::size_t excluded_cross_day = 0;
};

/// I_ren(z) = mean I(z) / mean I(1) per (eta, F) bin.
std::vector<DecayCurve> decay_curves(std::span<const OrderPath> paths,
                                     std::span<const double> eta_edges,
                                     std::span<const double> f_edges,
                                     const DecayOptions& opts = {});

struct OverlapRow {
  double lo_minutes = 0;
  double hi_minutes = 0;
  std::size_t count = 0;
  double mean_overlaps = 0;
  std::size_t overlaps = 0;
  double same_sign_fraction = 0;
  double opposite_sign_fraction = 0;
};

std::vector<double> default_overlap_bins();

std::vector<OverlapRow> overlap_stats(std::span<const Metaorder> orders,
                                      double horizon_multiple = 3.0,
                                      std::span<const double> duration_bins = {});

}  // namespace mimpact
