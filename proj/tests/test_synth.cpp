#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "mimpact/errors.hpp"
#include "mimpact/estimation.hpp"
#include "mimpact/pipeline.hpp"
#include "mimpact/synth.hpp"
#include "support.hpp"

using namespace mimpact;
using namespace mimpact::test;

namespace fs = std::filesystem;

namespace {

const Date kDay{2024, 3, 5};

SyntheticOrder manual_order(const VolumeClock& clock, int sign, double eta, double start, double end) {
  SyntheticOrder so;
  so.order = make_order("SYN", kDay, sign, 0, start, end);
  so.order.volume = eta * (clock.cumulative_volume(end) - clock.cumulative_volume(start));
  so.truth = compute_descriptors(so.order, clock);
  so.v_start = clock.volume_time(start);
  return so;
}

MarketConfig quiet_market(double sigma = 0.05) {
  MarketConfig m;
  m.sigma = sigma;
  m.noise_scale = 0;
  return m;
}

// Kolmogorov-Smirnov distance between a sample and an analytic CDF.
double ks_distance(std::vector<double> xs, const PowerLaw& law) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double c = law.cdf(xs[i]);
    d = std::max({d, std::fabs(c - i / n), std::fabs(c - (i + 1) / n)});
  }
  return d;
}

}  // namespace

TEST_CASE("truncated power-law sampler") {
  std::mt19937_64 rng(71);
  SUBCASE("flat exponent is uniform") {
    double sum = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += sample_trunc_power(0, 0.2, 0.6, rng);
    const double se = 0.4 / std::sqrt(12.0 * n);
    CHECK(std::fabs(sum / n - 0.4) < 3 * se);
  }
  SUBCASE("log-uniform median is the geometric midpoint") {
    std::vector<double> xs(100001);
    for (auto& x : xs) x = sample_trunc_power(-1, 0.01, 1, rng);
    std::nth_element(xs.begin(), xs.begin() + 50000, xs.end());
    CHECK(xs[50000] == doctest::Approx(0.1).epsilon(0.02));
    CHECK(PowerLaw{-1, 0.01, 1}.quantile(0.5) == doctest::Approx(0.1).epsilon(1e-14));
  }
  SUBCASE("participation law against its CDF") {
    const PowerLaw law{-0.864, 1e-4, 0.3};
    std::vector<double> xs(100000);
    for (auto& x : xs) x = sample_trunc_power(law.exponent, law.lo, law.hi, rng);
    CHECK(ks_distance(xs, law) < 0.01);
  }
  SUBCASE("sample means within three standard errors") {
    Gen g(72);
    for (int trial = 0; trial < 20; ++trial) {
      const double lo = g.log_uniform(1e-4, 0.1);
      const PowerLaw law{g.uniform(-2.5, 1.5), lo, g.uniform(lo * 2, 1.0)};
      const int n = 20000;
      double sum = 0;
      for (int i = 0; i < n; ++i) sum += sample_trunc_power(law.exponent, law.lo, law.hi, rng);
      CHECK_MESSAGE(std::fabs(sum / n - law.mean()) < 3 * std::sqrt(law.variance() / n), law.exponent);
    }
  }
  SUBCASE("invalid bounds") {
    CHECK_THROWS_AS(sample_trunc_power(-0.5, 0.0, 1, rng), DomainError);
    CHECK_THROWS_AS(sample_trunc_power(-0.5, -1, 1, rng), DomainError);
    CHECK_THROWS_AS(sample_trunc_power(-0.5, 0.5, 0.5, rng), DomainError);
  }
}

TEST_CASE("power-law moments by quadrature-free closed forms") {
  const PowerLaw law{-1, 0.01, 1};
  CHECK(law.mean() == doctest::Approx(0.99 / std::log(100.0)).epsilon(1e-14));
  CHECK(law.cdf(0.01) == 0.0);
  CHECK(law.cdf(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  const PowerLaw two{-2, 0.5, 1};
  CHECK(two.mean() == doctest::Approx(std::log(2.0)).epsilon(1e-14));  // int x^-1 / int x^-2
}

TEST_CASE("population reproducibility and descriptors") {
  PopulationConfig cfg;
  cfg.n_orders = 500;
  cfg.days = 5;
  cfg.symbols = 10;
  cfg.seed = 7;
  const auto a = generate_population(cfg);
  const auto b = generate_population(cfg);
  REQUIRE(a.size() == 500);
  REQUIRE(b.size() == 500);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].order.start == b[i].order.start);
    CHECK(a[i].order.volume == b[i].order.volume);
    CHECK(a[i].order.sign == b[i].order.sign);
    CHECK(a[i].truth.pi == doctest::Approx(a[i].truth.eta * a[i].truth.duration_f).epsilon(1e-14));
    CHECK(a[i].truth.eta <= 0.3 * (1 + 1e-9));
  }
  cfg.seed = 8;
  const auto c = generate_population(cfg);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= a[i].order.volume != c[i].order.volume;
  CHECK(differs);

  cfg.n_orders = 0;
  CHECK(generate_population(cfg).empty());
}

TEST_CASE("population herding") {
  PopulationConfig cfg;
  cfg.n_orders = 4000;
  cfg.days = 20;
  cfg.symbols = 20;
  cfg.seed = 9;
  SUBCASE("full herding shares one sign per day") {
    cfg.herding_p_same = 1.0;
    std::map<DayKey, std::set<int>> signs;
    for (const auto& o : generate_population(cfg)) signs[DayKey{o.order.symbol, o.order.date}].insert(o.order.sign);
    for (const auto& [key, s] : signs) CHECK(s.size() == 1);
  }
  SUBCASE("no herding gives independent signs") {
    cfg.herding_p_same = 0.5;
    std::vector<Metaorder> orders;
    for (const auto& o : generate_population(cfg)) orders.push_back(o.order);
    const auto all = overlap_stats(orders).back();
    REQUIRE(all.overlaps > 1000);
    const double se = 0.5 / std::sqrt(static_cast<double>(all.overlaps));
    CHECK(std::fabs(all.same_sign_fraction - 0.5) < 4 * se + 0.01);
  }
  CHECK_THROWS_AS(
      [] {
        PopulationConfig bad;
        bad.herding_p_same = 0.4;
        bad.validate();
      }(),
      DomainError);
}

TEST_CASE("session bars and the U-shaped volume profile") {
  const auto flat = session_bars(kDay, 1e6, VolumeProfile::flat);
  const auto u = session_bars(kDay, 1e6, VolumeProfile::u_shape);
  REQUIRE(flat.size() == 390);
  double total = 0;
  for (const auto& b : u) total += b.volume;
  CHECK(total == doctest::Approx(1e6).epsilon(1e-12));
  CHECK(u.front().volume > 2 * u[195].volume);
  const auto clock = VolumeClock::from_bars(u);
  CHECK(clock.volume_time(kMarketOpen + 195) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(clock.volume_time(kMarketOpen + 60) > 60.0 / 390);
}

TEST_CASE("market day: a single quiet order reproduces the model") {
  const auto clock = VolumeClock::from_bars(session_bars(kDay, 1e6, VolumeProfile::flat));
  const PropagatorModel model{0.5, 0.5, 0};
  for (int sign : {1, -1}) {
    const auto order = manual_order(clock, sign, 0.1, 600, 660);
    const auto day = build_market_day("SYN", kDay, {order}, model, quiet_market());
    for (const auto& b : day.bars) CHECK(b.consistent());
    CHECK(day.sigma_pinned);
    CHECK(day.sigma_proxy == 0.05);

    const auto data = dataset_from_market({day}, FilterConfig{});
    REQUIRE(data.filtered.survivors.size() == 1);
    const auto paths = market_paths(data, 3.0, false);
    REQUIRE(paths.size() == 1);
    const auto& p = paths[0];
    CHECK(p.v.back() == doctest::Approx(3 * order.truth.duration_f).epsilon(1e-9));
    for (std::size_t k = 0; k < p.v.size(); ++k) {
      const double want = model_trajectory(model, order.truth.eta, order.truth.duration_f, p.v[k] / p.duration_f);
      CHECK(p.impact[k] == doctest::Approx(want).epsilon(1e-9).scale(1e-9));
    }
    CHECK(p.at(p.duration_f) == doctest::Approx(model_temporary(model, order.truth.eta, order.truth.duration_f)).epsilon(1e-9));
  }
}

TEST_CASE("market day: opposite equal orders cancel") {
  const auto clock = VolumeClock::from_bars(session_bars(kDay, 1e6, VolumeProfile::flat));
  const std::vector<SyntheticOrder> orders{manual_order(clock, 1, 0.1, 620, 700),
                                           manual_order(clock, -1, 0.1, 620, 700)};
  const auto day = build_market_day("SYN", kDay, orders, PropagatorModel{0.5, 0.5, 0}, quiet_market());
  for (const auto& b : day.bars) CHECK(b.close == 100.0);
  CHECK(day.sigma_proxy == doctest::Approx(0.05).epsilon(1e-15));
}

TEST_CASE("market day: a linear model superposes exactly") {
  const auto clock = VolumeClock::from_bars(session_bars(kDay, 1e6, VolumeProfile::flat));
  const PropagatorModel linear{1.0, 0.0, 0};
  const auto a = manual_order(clock, 1, 0.05, 600, 700);
  const auto b = manual_order(clock, -1, 0.08, 650, 800);
  const auto both = build_market_day("SYN", kDay, {a, b}, linear, quiet_market(10.0));
  const auto only_a = build_market_day("SYN", kDay, {a}, linear, quiet_market(10.0));
  const auto only_b = build_market_day("SYN", kDay, {b}, linear, quiet_market(10.0));
  for (std::size_t k = 0; k < both.bars.size(); ++k) {
    const double s = std::log(both.bars[k].close / 100.0);
    const double sa = std::log(only_a.bars[k].close / 100.0);
    const double sb = std::log(only_b.bars[k].close / 100.0);
    CHECK(s == doctest::Approx(sa + sb).epsilon(1e-12).scale(1e-12));
  }
  // With delta = 1 and gamma = 0 the permanent impact is the executed fraction.
  const double final_s = std::log(both.bars.back().close / 100.0) / 10.0;
  CHECK(final_s == doctest::Approx(a.truth.pi - b.truth.pi).epsilon(1e-9));
}

TEST_CASE("generated market days are consistent and reproducible") {
  PopulationConfig cfg;
  cfg.n_orders = 300;
  cfg.days = 3;
  cfg.symbols = 5;
  cfg.seed = 11;
  cfg.profile = VolumeProfile::u_shape;
  const auto days = generate_market(cfg, PropagatorModel{});
  REQUIRE(days.size() == 15);
  std::size_t orders = 0;
  for (const auto& d : days) {
    orders += d.orders.size();
    for (const auto& b : d.bars) CHECK(b.consistent());
    CHECK(d.sigma_proxy >= 0.02 * (1 - 1e-12));
  }
  CHECK(orders == 300);
  const auto again = generate_market(cfg, PropagatorModel{});
  for (std::size_t i = 0; i < days.size(); ++i) {
    for (std::size_t k = 0; k < days[i].bars.size(); ++k) CHECK(days[i].bars[k].close == again[i].bars[k].close);
  }
}

TEST_CASE("written market files ingest back to the same dataset") {
  PopulationConfig cfg;
  cfg.n_orders = 400;
  cfg.days = 4;
  cfg.symbols = 5;
  cfg.seed = 12;
  const auto days = generate_market(cfg, PropagatorModel{});
  const auto dir = fs::temp_directory_path() / "mimpact_synth_roundtrip";
  fs::remove_all(dir);
  const auto written = write_market(days, dir, "fixture");
  CHECK(written.size() == 6);
  const auto direct = dataset_from_market(days, FilterConfig{});
  const auto loaded = ingest(dir / "metaorders.csv", dir / "bars", FilterConfig{});
  REQUIRE(loaded.filtered.survivors.size() == direct.filtered.survivors.size());
  for (std::size_t i = 0; i < direct.filtered.survivors.size(); ++i) {
    const auto& x = direct.filtered.survivors[i].descriptors;
    const auto& y = loaded.filtered.survivors[i].descriptors;
    CHECK(x.eta == y.eta);
    CHECK(x.duration_f == y.duration_f);
  }
  const auto pa = market_paths(direct, 3.0, false);
  const auto pb = market_paths(loaded, 3.0, false);
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i].impact == pb[i].impact);
  fs::remove_all(dir);
}

TEST_CASE("independent paths") {
  PopulationConfig cfg;
  cfg.n_orders = 50;
  cfg.days = 5;
  cfg.symbols = 2;
  const auto pop = generate_population(cfg);
  const PropagatorModel model{0.5, 0.5, 0};
  PathConfig quiet;
  quiet.noise_scale = 0;
  const auto paths = independent_paths(pop, model, quiet, 3);
  REQUIRE(paths.size() == pop.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    CHECK(paths[i].v.size() == 61);
    CHECK(paths[i].v[20] == pop[i].truth.duration_f);
    CHECK(paths[i].at(pop[i].truth.duration_f) ==
          doctest::Approx(model_temporary(model, pop[i].truth.eta, pop[i].truth.duration_f)).epsilon(1e-14));
  }
  const auto noisy_a = independent_paths(pop, model, PathConfig{}, 5);
  const auto noisy_b = independent_paths(pop, model, PathConfig{}, 5);
  CHECK(noisy_a[7].impact == noisy_b[7].impact);
  PathConfig bad;
  bad.horizon_multiple = 0.5;
  CHECK_THROWS_AS(independent_paths(pop, model, bad, 1), DomainError);
}
