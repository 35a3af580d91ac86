#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mimpact/errors.hpp"
#include "mimpact/estimation.hpp"
#include "mimpact/families.hpp"
#include "mimpact/impact_models.hpp"
#include "mimpact/latent_book.hpp"
#include "mimpact/special_fn.hpp"
#include "mimpact/synth.hpp"

namespace py = pybind11;
using namespace mimpact;

namespace {

py::dict fit_to_dict(const FitResult& fit) {
  py::dict params, errors;
  for (std::size_t k = 0; k < fit.params.size(); ++k) {
    params[py::str(fit.param_names[k])] = fit.params[k];
    errors[py::str(fit.param_names[k])] = fit.std_errors[k];
  }
  py::dict out;
  out["family"] = std::string(family_info(fit.family).name);
  out["params"] = params;
  out["std_errors"] = errors;
  out["e_rms"] = fit.e_rms;
  out["chi2"] = fit.chi2;
  out["n_points"] = fit.n_points;
  out["iterations"] = fit.iterations;
  return out;
}

py::dict curve_to_dict(const BinnedCurve& c) {
  std::vector<double> x, y, se;
  std::vector<std::size_t> count;
  for (const auto& r : c.rows) {
    x.push_back(r.x);
    y.push_back(r.y);
    se.push_back(r.se);
    count.push_back(r.count);
  }
  py::dict out;
  out["x"] = x;
  out["y"] = y;
  out["se"] = se;
  out["count"] = count;
  out["warnings"] = c.warnings;
  return out;
}

BinnedCurve curve_from(const std::vector<double>& x, const std::vector<double>& y,
                       const std::vector<double>& se, const std::vector<double>& x2) {
  if (x.size() != y.size() || x.size() != se.size() || (!x2.empty() && x2.size() != x.size())) {
    throw DomainError("curve columns must have equal lengths");
  }
  BinnedCurve c;
  for (std::size_t k = 0; k < x.size(); ++k) {
    c.rows.push_back(CurveRow{x[k], x2.empty() ? 0.0 : x2[k], y[k], se[k], 2});
  }
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Metaorder impact models, latent book and estimators";

  auto domain = py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", domain.ptr());
  py::register_exception<SaturationError>(m, "SaturationError", domain.ptr());
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
  py::register_exception<QuadratureError>(m, "QuadratureError", PyExc_ArithmeticError);
  py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);

  m.def("hyp2f1", py::overload_cast<double, double, double, double>(&hyp2f1), py::arg("a"),
        py::arg("b"), py::arg("c"), py::arg("z"));

  m.def(
      "integrate",
      [](std::function<double(double)> f, double lower, double upper, double rel_tol,
         std::optional<double> lower_exponent, std::optional<double> upper_exponent,
         std::vector<double> breakpoints) {
        QuadratureSpec spec;
        spec.integrand = std::move(f);
        spec.lower = lower;
        spec.upper = upper;
        spec.rel_tol = rel_tol;
        spec.lower_exponent = lower_exponent;
        spec.upper_exponent = upper_exponent;
        spec.breakpoints = std::move(breakpoints);
        const auto r = integrate_detailed(spec);
        return py::make_tuple(r.value, r.error);
      },
      py::arg("f"), py::arg("lower"), py::arg("upper"), py::arg("rel_tol") = 1e-8,
      py::arg("lower_exponent") = py::none(), py::arg("upper_exponent") = py::none(),
      py::arg("breakpoints") = std::vector<double>{});

  m.def(
      "ac_trajectory",
      [](double t, double a, double sigma, double lam, double eta, double horizon) {
        return ac_trajectory(AcParams{a, sigma, lam, eta, horizon}, t);
      },
      py::arg("t"), py::arg("a") = 1.0, py::arg("sigma") = 1.0, py::arg("lam") = 0.0,
      py::arg("eta") = 1.0, py::arg("horizon") = 1.0);
  m.def(
      "ac_inventory",
      [](double t, double a, double sigma, double lam, double eta, double horizon) {
        return ac_optimal_inventory(AcParams{a, sigma, lam, eta, horizon}, t);
      },
      py::arg("t"), py::arg("a") = 1.0, py::arg("sigma") = 1.0, py::arg("lam") = 0.0,
      py::arg("eta") = 1.0, py::arg("horizon") = 1.0);

  m.def(
      "propagator_temporary",
      [](double eta, double duration, double delta, double gamma, double alpha) {
        return alpha_temporary(PropagatorParams{delta, gamma, alpha, eta, duration});
      },
      py::arg("eta"), py::arg("duration"), py::arg("delta") = 0.5, py::arg("gamma") = 0.5,
      py::arg("alpha") = 0.0);
  m.def(
      "propagator_trajectory",
      [](double z, double eta, double duration, double delta, double gamma, double alpha) {
        return alpha_trajectory(PropagatorParams{delta, gamma, alpha, eta, duration}, z);
      },
      py::arg("z"), py::arg("eta"), py::arg("duration"), py::arg("delta") = 0.5,
      py::arg("gamma") = 0.5, py::arg("alpha") = 0.0);
  m.def(
      "simulate_propagator",
      [](double eta, double duration, double delta, double gamma, double alpha, double noise_scale,
         double step, std::uint64_t seed, double horizon_multiple) {
        SimulationConfig cfg{noise_scale, step, seed, horizon_multiple};
        const auto p = simulate_metaorder_path(PropagatorParams{delta, gamma, alpha, eta, duration}, cfg);
        py::dict out;
        out["z"] = p.z;
        out["v"] = p.time;
        out["impact"] = p.impact;
        out["deterministic"] = p.deterministic;
        out["step"] = p.step;
        out["coarse_step"] = p.coarse_step;
        return out;
      },
      py::arg("eta"), py::arg("duration"), py::arg("delta") = 0.5, py::arg("gamma") = 0.5,
      py::arg("alpha") = 0.0, py::arg("noise_scale") = 1.0, py::arg("step") = 1e-3,
      py::arg("seed") = 0, py::arg("horizon_multiple") = 3.0);

  py::class_<LatentBook>(m, "LatentBook")
      .def(py::init([](double y_norm, double b, double n) { return LatentBook(BookParams{y_norm, b, n}); }),
           py::arg("y_norm"), py::arg("b"), py::arg("n") = 0.0)
      .def_property_readonly("capacity", &LatentBook::capacity)
      .def("profile", &LatentBook::profile, py::arg("x"))
      .def("cumulative", &LatentBook::cumulative, py::arg("x"))
      .def("invert", &LatentBook::invert, py::arg("pi"));
  m.def("impact_log_closed", &impact_log_closed, py::arg("y_norm"), py::arg("b"), py::arg("pi"));

  m.def("families", [] {
    std::vector<std::string> names;
    for (auto f : all_families()) names.emplace_back(family_info(f).name);
    return names;
  });
  m.def(
      "family_eval",
      [](const std::string& family, std::vector<double> params, double x1, double x2) {
        return family_eval(parse_family(family), params, x1, x2);
      },
      py::arg("family"), py::arg("params"), py::arg("x1"), py::arg("x2") = 0.0);

  m.def(
      "impact_curve",
      [](std::vector<double> x, std::vector<double> y, int n_bins) {
        return curve_to_dict(impact_curve(x, y, n_bins));
      },
      py::arg("x"), py::arg("impact"), py::arg("n_bins") = 50);
  m.def(
      "fit_curve",
      [](const std::string& family, std::vector<double> x, std::vector<double> y,
         std::vector<double> se, std::vector<double> x2) {
        return fit_to_dict(weighted_nls(parse_family(family), curve_from(x, y, se, x2)));
      },
      py::arg("family"), py::arg("x"), py::arg("y"), py::arg("se"),
      py::arg("x2") = std::vector<double>{});

  m.def(
      "generate_population",
      [](std::size_t n_orders, std::uint64_t seed, double herding_p_same, std::size_t days,
         std::size_t symbols) {
        PopulationConfig cfg;
        cfg.n_orders = n_orders;
        cfg.seed = seed;
        cfg.herding_p_same = herding_p_same;
        cfg.days = days;
        cfg.symbols = symbols;
        const auto pop = generate_population(cfg);
        std::vector<double> eta, f, pi, start, end;
        std::vector<int> sign;
        std::vector<std::string> symbol, date;
        for (const auto& o : pop) {
          eta.push_back(o.truth.eta);
          f.push_back(o.truth.duration_f);
          pi.push_back(o.truth.pi);
          sign.push_back(o.order.sign);
          symbol.push_back(o.order.symbol);
          date.push_back(o.order.date.iso());
          start.push_back(o.order.start);
          end.push_back(o.order.end);
        }
        py::dict out;
        out["eta"] = eta;
        out["F"] = f;
        out["pi"] = pi;
        out["sign"] = sign;
        out["symbol"] = symbol;
        out["date"] = date;
        out["start_minute"] = start;
        out["end_minute"] = end;
        return out;
      },
      py::arg("n_orders") = 10000, py::arg("seed") = 0, py::arg("herding_p_same") = 0.5,
      py::arg("days") = 20, py::arg("symbols") = 10);
}
