#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "config.hpp"
#include "mimpact/errors.hpp"
#include "mimpact/estimation.hpp"
#include "mimpact/impact_models.hpp"
#include "mimpact/io.hpp"
#include "mimpact/latent_book.hpp"
#include "mimpact/pipeline.hpp"

namespace mimpact::cli {

namespace fs = std::filesystem;

namespace {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
};

class Run {
 public:
  Run(std::string command, json cfg, fs::path out_dir, bool json_tables)
      : command_(std::move(command)),
        cfg_(std::move(cfg)),
        hash_(config_hash(cfg_, command_)),
        out_dir_(std::move(out_dir)),
        json_tables_(json_tables) {}

  const json& cfg() const { return cfg_; }
  const json& section(const char* name) const { return cfg_.at(name); }
  std::uint64_t seed() const { return cfg_.at("seed").get<std::uint64_t>(); }
  const fs::path& out_dir() const { return out_dir_; }

  std::string comment() const {
    return "config_hash=" + hash_ + " seed=" + std::to_string(seed()) + " command=" + command_;
  }

  void table(const std::string& stem, const Table& t) {
    if (json_tables_) {
      json rows = json::array();
      for (const auto& r : t.rows) {
        json obj = json::object();
        for (std::size_t k = 0; k < t.columns.size(); ++k) obj[t.columns[k]] = r[k];
        rows.push_back(std::move(obj));
      }
      document(stem, json{{"columns", t.columns}, {"rows", std::move(rows)}});
      return;
    }
    auto& out = open(stem + ".csv");
    out << "# " << comment() << '\n';
    for (std::size_t k = 0; k < t.columns.size(); ++k) out << (k ? "," : "") << t.columns[k];
    out << '\n';
    for (const auto& r : t.rows) {
      for (std::size_t k = 0; k < r.size(); ++k) {
        if (k) out << ',';
        const json& cell = r[k];
        if (cell.is_number_float()) {
          out << format_number(cell.get<double>());
        } else if (cell.is_boolean()) {
          out << (cell.get<bool>() ? 1 : 0);
        } else if (cell.is_string()) {
          out << cell.get<std::string>();
        } else if (cell.is_null()) {
          out << "nan";
        } else {
          out << cell.dump();
        }
      }
      out << '\n';
    }
    close();
  }

  void document(const std::string& stem, json body) {
    body["config_hash"] = hash_;
    body["seed"] = seed();
    body["command"] = command_;
    auto& out = open(stem + ".json");
    out << body.dump(2) << '\n';
    close();
  }

  void adopt(const std::vector<fs::path>& paths) {
    written_.insert(written_.end(), paths.begin(), paths.end());
  }

  void rollback() {
    stream_.reset();
    for (const auto& p : written_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    written_.clear();
  }

  void report(std::ostream& out) const {
    for (const auto& p : written_) out << p.string() << '\n';
  }

 private:
  std::ofstream& open(const std::string& name) {
    const auto path = out_dir_ / name;
    written_.push_back(path);
    stream_ = std::make_unique<std::ofstream>(path);
    if (!*stream_) throw DataError("cannot write " + path.string());
    return *stream_;
  }
  void close() {
    stream_->close();
    if (!*stream_) throw DataError("write failed for " + written_.back().string());
    stream_.reset();
  }

  std::string command_;
  json cfg_;
  std::string hash_;
  fs::path out_dir_;
  bool json_tables_;
  std::vector<fs::path> written_;
  std::unique_ptr<std::ofstream> stream_;
};

json num(double x) { return json(x); }

// Edges of equal-population bins: edge k is the smallest member of bin k and the last
// edge lies just above the largest value, so [edge_k, edge_k+1) recovers the bins.
std::vector<double> equal_count_edges(const std::vector<double>& values, int n_bins) {
  if (values.empty()) throw DomainError("no samples to bin");
  const auto bins = equal_count_bins(values, n_bins);
  std::vector<double> lo(static_cast<std::size_t>(n_bins), std::numeric_limits<double>::infinity());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto& e = lo[static_cast<std::size_t>(bins[i])];
    e = std::min(e, values[i]);
    top = std::max(top, values[i]);
  }
  std::vector<double> edges(lo.begin(), lo.end());
  edges.push_back(std::nextafter(top, std::numeric_limits<double>::infinity()));
  return edges;
}

int as_int(const json& j, const std::string& key, int min_value) {
  const double v = j.get<double>();
  if (v != std::floor(v) || v < min_value) {
    throw ConfigError(key + " must be an integer >= " + std::to_string(min_value));
  }
  return static_cast<int>(v);
}

struct PathData {
  std::vector<OrderPath> paths;
  std::vector<Metaorder> orders;
  json notes = json::object();
};

PathData load_paths(const Run& run) {
  const auto& src = run.section("source");
  const auto& est = run.section("estimation");
  const double horizon = est.at("horizon_multiple").get<double>();
  const bool cross_day = est.at("cross_day").get<bool>();
  const std::string kind = src.at("kind").get<std::string>();
  PathData out;
  out.notes["source"] = kind;

  auto from_dataset = [&](const Dataset& data) {
    PathStats stats;
    out.paths = market_paths(data, horizon, cross_day, &stats);
    out.orders.reserve(data.filtered.survivors.size());
    for (const auto& fo : data.filtered.survivors) out.orders.push_back(fo.order);
    out.notes["raw_orders"] = data.raw.size();
    out.notes["filtered_orders"] = data.filtered.survivors.size();
    out.notes["degenerate_days"] = data.degenerate_days;
    out.notes["degenerate_orders"] = stats.degenerate;
    out.notes["gap_flagged"] = stats.gap_flagged;
    out.notes["malformed_rows"] = data.diagnostics.malformed;
  };

  if (kind == "independent") {
    const auto pop = generate_population(population_from_config(run.cfg()));
    PathConfig pc;
    pc.noise_scale = src.at("noise_scale").get<double>();
    pc.horizon_multiple = horizon;
    out.paths = independent_paths(pop, model_from_config(run.cfg()), pc, derive_seed(run.seed(), 1));
    out.orders.reserve(pop.size());
    for (const auto& o : pop) out.orders.push_back(o.order);
  } else if (kind == "market") {
    const auto days = generate_market(population_from_config(run.cfg()), model_from_config(run.cfg()),
                                      market_from_config(run.cfg()));
    from_dataset(dataset_from_market(days, filters_from_config(run.cfg())));
  } else if (kind == "files") {
    const auto mo = src.at("metaorders").get<std::string>();
    const auto bars = src.at("bars").get<std::string>();
    if (mo.empty() || bars.empty()) {
      throw ConfigError("source.kind=files needs source.metaorders and source.bars");
    }
    from_dataset(ingest(mo, bars, filters_from_config(run.cfg())));
  } else {
    throw ConfigError("source.kind must be independent, market or files");
  }
  if (out.paths.empty()) throw DataError("no-data: no impact paths survived");
  return out;
}

double temporary_of(const OrderPath& p) { return p.at(p.duration_f); }

std::vector<SurfaceSample> surface_samples(const PathData& data) {
  std::vector<SurfaceSample> out;
  out.reserve(data.paths.size());
  for (const auto& p : data.paths) {
    const double i = temporary_of(p);
    if (std::isfinite(i)) out.push_back(SurfaceSample{p.eta, p.duration_f, i});
  }
  return out;
}

json fit_json(const FitResult& fit) {
  json params = json::object();
  json errors = json::object();
  for (std::size_t k = 0; k < fit.params.size(); ++k) {
    params[fit.param_names[k]] = fit.params[k];
    errors[fit.param_names[k]] = fit.std_errors[k];
  }
  return json{{"family", family_info(fit.family).name}, {"params", params}, {"std_errors", errors},
              {"e_rms", fit.e_rms}, {"chi2", fit.chi2}, {"n_points", fit.n_points},
              {"iterations", fit.iterations}};
}

Family family_of(const json& j, const std::string& key) {
  try {
    return parse_family(j.get<std::string>());
  } catch (const std::exception& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------------------
// Commands

void cmd_simulate(Run& run) {
  const auto& s = run.section("simulate");
  const auto model = model_from_config(run.cfg());
  const double eta = s.at("eta").get<double>();
  const double z_max = s.at("z_max").get<double>();
  const double z_step = s.at("z_step").get<double>();
  if (!(z_step > 0) || !(z_max > 0)) throw ConfigError("simulate.z_max and z_step must be positive");
  const auto n_z = static_cast<int>(std::llround(z_max / z_step));

  SimulationConfig sim;
  sim.noise_scale = s.at("noise_scale").get<double>();
  sim.step = s.at("step").get<double>();
  sim.horizon_multiple = z_max;

  json meta = json::object();
  meta["durations"] = json::array();
  const auto durations = s.at("durations").get<std::vector<double>>();
  for (std::size_t d = 0; d < durations.size(); ++d) {
    const double f = durations[d];
    sim.seed = derive_seed(run.seed(), 100 + d);
    SimulatedPath path;
    if (const auto* pm = std::get_if<PropagatorModel>(&model)) {
      PropagatorParams p{pm->delta, pm->gamma, pm->alpha, eta, f};
      path = simulate_metaorder_path(p, sim);
      meta["manipulation_flag"] = p.manipulation_flag();
    } else if (const auto* am = std::get_if<AcModel>(&model)) {
      path = simulate_metaorder_path(AcParams{am->a, am->sigma, am->lambda, eta, f}, sim);
    } else {
      // Curve models have no execution dynamics of their own: closed form plus Brownian noise.
      sim.validate();
      const auto n = std::max<long long>(1, std::llround(f / sim.step));
      const double h = f / static_cast<double>(n);
      const auto total = static_cast<long long>(std::ceil(z_max * static_cast<double>(n) - 1e-9));
      std::mt19937_64 rng(sim.seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      double w = 0;
      for (long long k = 0; k <= total; ++k) {
        const double z = static_cast<double>(k) / static_cast<double>(n);
        if (k > 0) w += sim.noise_scale * std::sqrt(h) * normal(rng);
        const double det = model_trajectory(model, eta, f, z);
        path.z.push_back(z);
        path.time.push_back(z * f);
        path.deterministic.push_back(det);
        path.impact.push_back(det + w);
      }
      path.step = h;
      path.coarse_step = n < 10;
    }

    Table t{{"z", "v", "closed_form", "simulated"}, {}};
    for (int k = 0; k <= n_z; ++k) {
      const double z = static_cast<double>(k) * z_step;
      // Linear interpolation of the simulated grid at z.
      const auto it = std::lower_bound(path.z.begin(), path.z.end(), z);
      double sim_value = std::numeric_limits<double>::quiet_NaN();
      if (it != path.z.end()) {
        const auto j = static_cast<std::size_t>(it - path.z.begin());
        if (j == 0 || *it == z) {
          sim_value = path.impact[j];
        } else {
          const double w = (z - path.z[j - 1]) / (path.z[j] - path.z[j - 1]);
          sim_value = path.impact[j - 1] + w * (path.impact[j] - path.impact[j - 1]);
        }
      }
      t.rows.push_back({num(z), num(z * f), num(model_trajectory(model, eta, f, z)), num(sim_value)});
    }
    run.table("trajectory_F" + format_number(f), t);
    meta["durations"].push_back(json{{"F", f}, {"step", path.step}, {"coarse_step", path.coarse_step},
                                     {"temporary", model_temporary(model, eta, f)}});
  }
  run.document("simulate", meta);
}

void cmd_generate(Run& run) {
  const auto pop = population_from_config(run.cfg());
  const auto days = generate_market(pop, model_from_config(run.cfg()), market_from_config(run.cfg()));
  run.adopt(write_market(days, run.out_dir(), run.comment()));

  Table truth{{"symbol", "date", "sign", "start", "end", "eta", "F", "pi", "v_start"}, {}};
  Table day_table{{"symbol", "date", "orders", "sigma_proxy", "sigma_pinned"}, {}};
  for (const auto& d : days) {
    for (const auto& o : d.orders) {
      truth.rows.push_back({o.order.symbol, o.order.date.iso(), o.order.sign,
                            format_timestamp(o.order.date, o.order.start),
                            format_timestamp(o.order.date, o.order.end), num(o.truth.eta),
                            num(o.truth.duration_f), num(o.truth.pi), num(o.v_start)});
    }
    day_table.rows.push_back({d.symbol, d.date.iso(), d.orders.size(), num(d.sigma_proxy), d.sigma_pinned});
  }
  run.table("truth", truth);
  run.table("days", day_table);
}

void cmd_fit_curve(Run& run) {
  const auto& est = run.section("estimation");
  const auto data = load_paths(run);
  std::vector<double> x, y;
  for (const auto& p : data.paths) {
    const double i = temporary_of(p);
    if (!std::isfinite(i)) continue;
    x.push_back(p.pi);
    y.push_back(i);
  }
  const auto curve = impact_curve(x, y, as_int(est.at("n_bins"), "estimation.n_bins", 1));
  // Book families resolve the saturation region only on a much finer binning.
  std::optional<BinnedCurve> book_curve;

  json fits = json::array();
  json failures = json::array();
  std::vector<FitResult> ok, ok_book;
  for (const auto& name : est.at("families")) {
    const Family f = family_of(name, "estimation.families");
    const bool book = f == Family::book_n0 || f == Family::book_n1 || f == Family::book_n;
    if (book && !book_curve) book_curve = impact_curve(x, y, as_int(est.at("book_bins"), "estimation.book_bins", 1));
    try {
      auto& dest = book ? ok_book : ok;
      dest.push_back(weighted_nls(f, book ? *book_curve : curve));
      fits.push_back(fit_json(dest.back()));
    } catch (const FitError& e) {
      failures.push_back(json{{"family", family_info(f).name}, {"error", e.what()}});
    }
  }

  auto curve_table = [](const BinnedCurve& c, const std::vector<FitResult>& fitted) {
    Table t{{"pi", "impact", "se", "count"}, {}};
    for (const auto& fit : fitted) t.columns.push_back("fit_" + std::string(family_info(fit.family).name));
    for (const auto& row : c.rows) {
      std::vector<json> r{num(row.x), num(row.y), num(row.se), row.count};
      for (const auto& fit : fitted) r.push_back(num(family_eval(fit.family, fit.params, row.x)));
      t.rows.push_back(std::move(r));
    }
    return t;
  };
  run.table("curve", curve_table(curve, ok));
  if (book_curve) run.table("book_curve", curve_table(*book_curve, ok_book));
  run.document("fits", json{{"fits", fits}, {"failures", failures}, {"warnings", curve.warnings},
                            {"data", data.notes}, {"n_samples", x.size()}});
}

struct SurfaceSetup {
  std::vector<SurfaceSample> samples;
  int n_eta;
  int n_f;
  json notes;
};

SurfaceSetup surface_setup(const Run& run) {
  const auto& est = run.section("estimation");
  auto data = load_paths(run);
  return SurfaceSetup{surface_samples(data), as_int(est.at("n_eta_bins"), "estimation.n_eta_bins", 1),
                      as_int(est.at("n_f_bins"), "estimation.n_f_bins", 1), data.notes};
}

Table grid_table(const SurfaceGrid& g) {
  Table t{{"i", "j", "eta_lo", "eta_hi", "f_lo", "f_hi", "eta_mean", "f_mean", "impact", "se", "count"}, {}};
  for (int i = 0; i < g.n_eta; ++i) {
    for (int j = 0; j < g.n_f; ++j) {
      const auto& c = g.at(i, j);
      t.rows.push_back({i, j, num(g.eta_edges[i]), num(g.eta_edges[i + 1]), num(g.f_edges[j]),
                        num(g.f_edges[j + 1]), num(c.eta_mean), num(c.f_mean), num(c.impact_mean),
                        num(c.impact_se), c.count});
    }
  }
  return t;
}

void cmd_fit_surface(Run& run, bool with_residuals) {
  const auto setup = surface_setup(run);
  const Family family = family_of(run.section("estimation").at("surface_family"), "estimation.surface_family");
  const auto sf = fit_surface(setup.samples, setup.n_eta, setup.n_f, family);
  if (with_residuals) {
    const auto res = residual_map(sf.fit, sf.grid);
    Table t{{"i", "j", "eta_mean", "f_mean", "residual"}, {}};
    for (int i = 0; i < sf.grid.n_eta; ++i) {
      for (int j = 0; j < sf.grid.n_f; ++j) {
        const auto& c = sf.grid.at(i, j);
        t.rows.push_back({i, j, num(c.eta_mean), num(c.f_mean),
                          num(res[static_cast<std::size_t>(i * sf.grid.n_f + j)])});
      }
    }
    run.table("residuals", t);
  } else {
    run.table("surface", grid_table(sf.grid));
  }
  run.document(with_residuals ? "residuals_fit" : "surface_fit",
               json{{"fit", fit_json(sf.fit)}, {"data", setup.notes}, {"n_samples", setup.samples.size()}});
}

void cmd_local_exponents(Run& run) {
  const auto setup = surface_setup(run);
  const int window = as_int(run.section("estimation").at("window"), "estimation.window", 1);
  const auto map = local_exponent_map(setup.samples, setup.n_eta, setup.n_f, window);
  Table t{{"i", "j", "eta_mean", "f_mean", "delta", "gamma1", "flagged"}, {}};
  std::size_t flagged = 0;
  for (int i = 0; i < map.grid.n_eta; ++i) {
    for (int j = 0; j < map.grid.n_f; ++j) {
      const auto& g = map.grid.at(i, j);
      const auto& c = map.cells[static_cast<std::size_t>(i * map.grid.n_f + j)];
      flagged += c.flagged;
      t.rows.push_back({i, j, num(g.eta_mean), num(g.f_mean), num(c.delta), num(c.gamma1), c.flagged});
    }
  }
  run.table("local_exponents", t);
  run.document("local_exponents_summary",
               json{{"flagged_cells", flagged}, {"window", window}, {"data", setup.notes}});
}

void cmd_trajectories(Run& run) {
  const auto& est = run.section("estimation");
  const auto data = load_paths(run);
  std::vector<double> etas;
  for (const auto& p : data.paths) etas.push_back(p.eta);
  const int n_bins = as_int(est.at("eta_bins"), "estimation.eta_bins", 1);
  const int which = as_int(est.at("trajectory_eta_bin"), "estimation.trajectory_eta_bin", 0);
  if (which >= n_bins) throw ConfigError("estimation.trajectory_eta_bin must be below estimation.eta_bins");
  const auto edges = equal_count_edges(etas, n_bins);
  const auto f_edges = est.at("f_edges").get<std::vector<double>>();
  const auto curves = trajectory_curves(data.paths, edges[which], edges[which + 1], f_edges,
                                        as_int(est.at("trajectory_points"), "estimation.trajectory_points", 2));
  Table t{{"f_lo", "f_hi", "count", "v", "impact", "se"}, {}};
  Table markers{{"f_lo", "f_hi", "count", "marker_f", "marker_impact", "marker_se"}, {}};
  for (const auto& c : curves) {
    for (std::size_t k = 0; k < c.v.size(); ++k) {
      t.rows.push_back({num(c.f_lo), num(c.f_hi), c.count, num(c.v[k]), num(c.mean[k]), num(c.se[k])});
    }
    markers.rows.push_back({num(c.f_lo), num(c.f_hi), c.count, num(c.marker_f), num(c.marker_impact),
                            num(c.marker_se)});
  }
  run.table("trajectories", t);
  run.table("markers", markers);
  run.document("trajectories_summary",
               json{{"eta_lo", edges[which]}, {"eta_hi", edges[which + 1]}, {"data", data.notes}});
}

void cmd_decay(Run& run) {
  const auto& est = run.section("estimation");
  const auto data = load_paths(run);
  std::vector<double> etas;
  for (const auto& p : data.paths) etas.push_back(p.eta);
  const auto eta_edges = equal_count_edges(etas, as_int(est.at("eta_bins"), "estimation.eta_bins", 1));
  const auto f_edges = est.at("f_edges").get<std::vector<double>>();
  DecayOptions opts;
  opts.horizon_multiple = est.at("horizon_multiple").get<double>();
  opts.cross_day = est.at("cross_day").get<bool>();
  const auto curves = decay_curves(data.paths, eta_edges, f_edges, opts);

  Table t{{"eta_lo", "eta_hi", "f_lo", "f_hi", "z", "i_ren", "se"}, {}};
  Table summary{{"eta_lo", "eta_hi", "f_lo", "f_hi", "n_orders", "excluded_small", "excluded_short",
                 "excluded_cross_day"}, {}};
  for (const auto& c : curves) {
    for (std::size_t k = 0; k < c.z_grid.size(); ++k) {
      t.rows.push_back({num(c.eta_lo), num(c.eta_hi), num(c.f_lo), num(c.f_hi), num(c.z_grid[k]),
                        num(c.i_ren[k]), num(c.se[k])});
    }
    summary.rows.push_back({num(c.eta_lo), num(c.eta_hi), num(c.f_lo), num(c.f_hi), c.n_orders,
                            c.excluded_small, c.excluded_short, c.excluded_cross_day});
  }
  run.table("decay", t);
  run.table("decay_summary", summary);
  run.document("decay_notes", json{{"data", data.notes}});
}

void cmd_overlap(Run& run) {
  const auto& est = run.section("estimation");
  const auto data = load_paths(run);
  const auto bins = est.at("duration_bins").get<std::vector<double>>();
  const auto rows = overlap_stats(data.orders, est.at("horizon_multiple").get<double>(), bins);
  Table t{{"lo_minutes", "hi_minutes", "count", "mean_overlaps", "overlaps", "same_sign", "opposite_sign"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({num(r.lo_minutes), num(r.hi_minutes), r.count, num(r.mean_overlaps), r.overlaps,
                      num(r.same_sign_fraction), num(r.opposite_sign_fraction)});
  }
  run.table("overlap", t);
}

void cmd_book_invert(Run& run) {
  const auto& b = run.section("book");
  BookParams p{b.at("y_norm").get<double>(), b.at("b").get<double>(), b.at("n").get<double>()};
  const LatentBook book(p);
  const double lo = b.at("pi_min").get<double>();
  const double hi = b.at("pi_max").get<double>();
  const int n = as_int(b.at("n_points"), "book.n_points", 2);
  if (!(lo > 0) || !(hi > lo)) throw ConfigError("book.pi_min and book.pi_max must satisfy 0 < min < max");

  Table t{{"pi", "impact", "log_closed", "saturated"}, {}};
  const bool log_form = p.n == 0;
  for (int k = 0; k < n; ++k) {
    const double pi = lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
    double impact = std::numeric_limits<double>::quiet_NaN();
    bool saturated = false;
    try {
      impact = book.invert(pi);
    } catch (const SaturationError&) {
      saturated = true;
    }
    const double closed = log_form && !saturated ? impact_log_closed(p.y_norm, p.b, pi)
                                                 : std::numeric_limits<double>::quiet_NaN();
    t.rows.push_back({num(pi), num(impact), num(closed), saturated});
  }
  run.table("book", t);

  const int m = as_int(b.at("profile_points"), "book.profile_points", 2);
  Table prof{{"x", "depth", "cumulative"}, {}};
  for (int k = 0; k < m; ++k) {
    const double x = static_cast<double>(k) / (m - 1);
    prof.rows.push_back({num(x), num(book.profile(x)), num(book.cumulative(x))});
  }
  run.table("book_profile", prof);
  run.document("book_summary", json{{"capacity", book.capacity()}, {"c", p.c()}});
}

void cmd_ingest(Run& run) {
  const auto& src = run.section("source");
  const auto mo = src.at("metaorders").get<std::string>();
  const auto bars = src.at("bars").get<std::string>();
  if (mo.empty() || bars.empty()) throw ConfigError("ingest needs source.metaorders and source.bars");
  const auto data = ingest(mo, bars, filters_from_config(run.cfg()));
  const auto& r = data.filtered.report;

  Table report{{"stage", "count", "rejected"}, {}};
  report.rows.push_back({"raw", r.raw, 0});
  report.rows.push_back({"filter1_symbols", r.after_filter1, r.rejected_filter1});
  report.rows.push_back({"filter2_end_time", r.after_filter2, r.rejected_filter2});
  report.rows.push_back({"filter3_duration", r.after_filter3, r.rejected_filter3});
  report.rows.push_back({"no_data", r.after_filter3 - r.no_data, r.no_data});
  report.rows.push_back({"filter4_participation", r.after_filter4, r.rejected_filter4});
  run.table("filter_report", report);

  Table ds{{"symbol", "date", "sign", "volume", "start", "end", "eta", "F", "pi"}, {}};
  for (const auto& fo : data.filtered.survivors) {
    const auto& o = fo.order;
    ds.rows.push_back({o.symbol, o.date.iso(), o.sign, num(o.volume), format_timestamp(o.date, o.start),
                       format_timestamp(o.date, o.end), num(fo.descriptors.eta),
                       num(fo.descriptors.duration_f), num(fo.descriptors.pi)});
  }
  run.table("dataset", ds);
  run.document("ingest_diagnostics", json{{"rows", data.diagnostics.rows},
                                          {"malformed", data.diagnostics.malformed},
                                          {"messages", data.diagnostics.messages},
                                          {"degenerate_days", data.degenerate_days}});
}

struct Command {
  const char* name;
  const char* help;
  std::function<void(Run&)> action;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> all{
      {"simulate", "closed-form and simulated trajectories for several durations", cmd_simulate},
      {"generate", "synthetic bars and metaorders with ground truth", cmd_generate},
      {"fit-curve", "binned impact curve and weighted least-squares fits", cmd_fit_curve},
      {"fit-surface", "impact surface over (eta, F) and its fit",
       [](Run& r) { cmd_fit_surface(r, false); }},
      {"residuals", "standardized residuals of the surface fit", [](Run& r) { cmd_fit_surface(r, true); }},
      {"local-exponents", "local (delta, gamma1) map over the surface", cmd_local_exponents},
      {"trajectories", "mean impact build-up per duration bin", cmd_trajectories},
      {"decay", "renormalised impact decay per (eta, F) bin", cmd_decay},
      {"overlap", "overlap statistics by duration", cmd_overlap},
      {"book-invert", "latent order book inversion", cmd_book_invert},
      {"ingest", "parse, filter and describe metaorder files", cmd_ingest},
  };
  return all;
}

struct CommonOptions {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::string format = "csv";
  std::string preset;
};

json resolve_config(const CommonOptions& opts) {
  json cfg = default_config();
  if (!opts.config.empty()) {
    std::ifstream in(opts.config);
    if (!in) throw ConfigError("cannot read config file " + opts.config);
    json file;
    try {
      file = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config file " + opts.config + ": " + e.what());
    }
    merge_config(cfg, file);
  }
  for (const auto& s : opts.sets) apply_override(cfg, s);
  if (!opts.preset.empty()) cfg["model"]["preset"] = opts.preset;
  if (opts.seed) cfg["seed"] = *opts.seed;
  if (!cfg["seed"].is_number_integer() || cfg["seed"].get<double>() < 0) {
    throw ConfigError("seed must be a non-negative integer");
  }
  return cfg;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Metaorder impact models, synthetic markets and estimators"};
  app.name("mimpact");
  app.require_subcommand(1);

  CommonOptions opts;
  bool list_presets = false;
  app.add_flag("--list-presets", list_presets, "print the model presets and exit");

  std::string chosen;
  for (const auto& c : commands()) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", opts.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--set", opts.sets, "override a config key, e.g. --set estimation.n_bins=30");
    sub->add_option("--seed", opts.seed, "master seed");
    sub->add_option("--out", opts.out, "output directory");
    sub->add_option("--format", opts.format, "table format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--preset", opts.preset, "model preset (see --list-presets)");
    sub->callback([&chosen, name = c.name] { chosen = name; });
  }

  try {
    if (argc == 2 && std::string(argv[1]) == "--list-presets") {
      for (const auto& p : presets()) out << p.name << "\t" << p.description << '\n';
      return 0;
    }
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  std::unique_ptr<Run> run;
  try {
    json cfg = resolve_config(opts);
    fs::create_directories(opts.out);
    run = std::make_unique<Run>(chosen, std::move(cfg), opts.out, opts.format == "json");
    const auto& cmd = *std::find_if(commands().begin(), commands().end(),
                                    [&](const Command& c) { return chosen == c.name; });
    cmd.action(*run);
    run->report(out);
    return 0;
  } catch (const std::exception& e) {
    if (run) run->rollback();
    err << "mimpact " << chosen << ": error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mimpact::cli
