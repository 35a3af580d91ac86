#include "mimpact/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <type_traits>

#include "mimpact/errors.hpp"
#include "mimpact/impact_models.hpp"

namespace mimpact {

namespace {

// integral of x^p over [lo, hi]
double power_integral(double p, double lo, double hi) {
  if (p == -1) return std::log(hi / lo);
  return (std::pow(hi, p + 1) - std::pow(lo, p + 1)) / (p + 1);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

void PowerLaw::validate() const {
  if (!(lo > 0)) throw DomainError("truncated power law: lower bound must be positive");
  if (!(lo < hi)) throw DomainError("truncated power law: lower bound must be below upper bound");
  if (!std::isfinite(exponent) || !std::isfinite(hi)) throw DomainError("truncated power law: non-finite parameter");
}

double PowerLaw::cdf(double x) const {
  if (x <= lo) return 0;
  if (x >= hi) return 1;
  return power_integral(exponent, lo, x) / power_integral(exponent, lo, hi);
}

double PowerLaw::mean() const {
  return power_integral(exponent + 1, lo, hi) / power_integral(exponent, lo, hi);
}

double PowerLaw::variance() const {
  const double m = mean();
  return power_integral(exponent + 2, lo, hi) / power_integral(exponent, lo, hi) - m * m;
}

double PowerLaw::quantile(double u) const {
  validate();
  if (exponent == -1) return lo * std::pow(hi / lo, u);
  const double e = exponent + 1;
  const double a = std::pow(lo, e);
  const double b = std::pow(hi, e);
  return std::clamp(std::pow(a + u * (b - a), 1 / e), lo, hi);
}

double sample_trunc_power(double exponent, double lo, double hi, std::mt19937_64& rng) {
  const PowerLaw law{exponent, lo, hi};
  law.validate();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  return law.quantile(unif(rng));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ (stream * 0xD1B54A32D192ED03ULL + 1));
}

void PopulationConfig::validate() const {
  eta_law.validate();
  f_law.validate();
  if (eta_law.hi > 1) throw DomainError("population: eta law must lie within (0, 1]");
  if (f_law.hi > 1) throw DomainError("population: F law must lie within (0, 1]");
  if (!(herding_p_same >= 0.5 && herding_p_same <= 1)) {
    throw DomainError("population: herding_p_same must lie in [0.5, 1]");
  }
  if (days == 0 || symbols == 0) throw DomainError("population: need at least one day and symbol");
  if (!(daily_volume > 0)) throw DomainError("population: daily volume must be positive");
}

double PopulationConfig::mood_probability() const {
  // Two independent followers agree with probability p^2 + (1 - p)^2 = herding_p_same.
  return 0.5 * (1 + std::sqrt(std::max(0.0, 2 * herding_p_same - 1)));
}

std::vector<MinuteBar> session_bars(const Date& date, double daily_volume, VolumeProfile profile,
                                    double price) {
  constexpr int kMinutes = static_cast<int>(kMarketClose - kMarketOpen);
  std::vector<double> weights(kMinutes, 1.0);
  if (profile == VolumeProfile::u_shape) {
    for (int k = 0; k < kMinutes; ++k) {
      const double u = (k + 0.5 - kMinutes / 2.0) / (kMinutes / 2.0);
      weights[static_cast<std::size_t>(k)] = 1 + 2 * u * u;
    }
  }
  double total = 0;
  for (double w : weights) total += w;
  std::vector<MinuteBar> bars(kMinutes);
  for (int k = 0; k < kMinutes; ++k) {
    auto& b = bars[static_cast<std::size_t>(k)];
    b.date = date;
    b.minute = static_cast<int>(kMarketOpen) + k;
    b.open = b.high = b.low = b.close = price;
    b.volume = daily_volume * weights[static_cast<std::size_t>(k)] / total;
  }
  return bars;
}

namespace {

std::string symbol_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "S%03zu", i);
  return buf;
}

struct Slot {
  std::string symbol;
  Date date;
  std::size_t index = 0;
  std::size_t n_orders = 0;
};

std::vector<Slot> make_slots(const PopulationConfig& cfg) {
  std::vector<Slot> slots;
  const std::size_t n_slots = cfg.days * cfg.symbols;
  const std::size_t base = cfg.n_orders / n_slots;
  const std::size_t rem = cfg.n_orders % n_slots;
  Date day = cfg.start_date;
  const std::chrono::weekday wd{std::chrono::sys_days{std::chrono::days{day.serial()}}};
  if (wd == std::chrono::Saturday || wd == std::chrono::Sunday) day = day.next_weekday();
  for (std::size_t d = 0; d < cfg.days; ++d) {
    for (std::size_t s = 0; s < cfg.symbols; ++s) {
      const std::size_t idx = d * cfg.symbols + s;
      slots.push_back(Slot{symbol_name(s), day, idx, base + (idx < rem ? 1 : 0)});
    }
    day = day.next_weekday();
  }
  return slots;
}

std::vector<SyntheticOrder> slot_orders(const PopulationConfig& cfg, const Slot& slot,
                                        const VolumeClock& clock, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution follow(cfg.mood_probability());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double open = clock.open_minute();
  const double close = clock.close_minute();
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<SyntheticOrder> out;
    const int mood = coin(rng) ? 1 : -1;
    for (std::size_t i = 0; i < slot.n_orders; ++i) {
      const double eta = cfg.eta_law.quantile(unif(rng));
      const double f = cfg.f_law.quantile(unif(rng));
      const bool agrees = follow(rng);
      const double vs = unif(rng) * (1 - f);
      double start = std::round(clock.wall_clock(vs));
      double end = std::round(clock.wall_clock(std::min(1.0, vs + f)));
      end = std::min(end, close);
      if (end <= start) {
        end = std::min(start + 1, close);
        start = end - 1;
      }
      start = std::max(start, open);
      SyntheticOrder so;
      so.order.symbol = slot.symbol;
      so.order.date = slot.date;
      so.order.sign = agrees ? mood : -mood;
      so.order.start = start;
      so.order.end = end;
      so.order.volume = eta * (clock.cumulative_volume(end) - clock.cumulative_volume(start));
      so.truth = compute_descriptors(so.order, clock);
      so.v_start = clock.volume_time(start);
      out.push_back(std::move(so));
    }
    // Aggregate participation may not exceed the market volume in any minute.
    bool feasible = true;
    for (double m = open; m < close && feasible; m += 1) {
      double load = 0;
      for (const auto& o : out) {
        if (o.order.start <= m && m < o.order.end) load += o.truth.eta;
      }
      feasible = load <= 1;
    }
    if (feasible) return out;
  }
  throw DomainError("population: cannot keep aggregate participation below 1 on " +
                    slot.date.iso() + " " + slot.symbol);
}

}  // namespace

std::vector<SyntheticOrder> generate_population(const PopulationConfig& cfg) {
  cfg.validate();
  std::vector<SyntheticOrder> out;
  if (cfg.n_orders == 0) return out;
  out.reserve(cfg.n_orders);
  for (const auto& slot : make_slots(cfg)) {
    if (slot.n_orders == 0) continue;
    const auto bars = session_bars(slot.date, cfg.daily_volume, cfg.profile);
    const auto clock = VolumeClock::from_bars(bars);
    std::mt19937_64 rng(derive_seed(cfg.seed, slot.index));
    for (auto& o : slot_orders(cfg, slot, clock, rng)) out.push_back(std::move(o));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double vwap_shape(double z, double gamma) {
  const double e = 1 - gamma;
  if (z <= 0) return 0;
  if (z <= 1) return std::pow(z, e);
  return std::pow(z, e) - std::pow(z - 1, e);
}

}  // namespace

double model_trajectory(const ImpactModel& model, double eta, double duration_f, double z) {
  if (z <= 0) return 0;
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PropagatorModel>) {
          const PropagatorParams p{m.delta, m.gamma, m.alpha, eta, duration_f};
          return m.alpha == 0 ? vwap_trajectory(p, z) : alpha_trajectory(p, z);
        } else if constexpr (std::is_same_v<T, AcModel>) {
          const AcParams p{m.a, m.sigma, m.lambda, eta, duration_f};
          return ac_trajectory(p, std::min(z, 1.0) * duration_f);
        } else {
          if (!(m.shape_gamma >= 0 && m.shape_gamma < 1)) {
            throw DomainError("curve model: shape_gamma must lie in [0, 1)");
          }
          const double temp = family_info(m.family).n_inputs == 2
                                  ? family_eval(m.family, m.params, eta, duration_f)
                                  : family_eval(m.family, m.params, eta * duration_f);
          if (!std::isfinite(temp)) throw DomainError("curve model undefined at these descriptors");
          return temp * vwap_shape(z, m.shape_gamma);
        }
      },
      model);
}

double model_temporary(const ImpactModel& model, double eta, double duration_f) {
  return model_trajectory(model, eta, duration_f, 1.0);
}

SyntheticMarketDay build_market_day(const std::string& symbol, const Date& date,
                                    std::vector<SyntheticOrder> orders, const ImpactModel& model,
                                    const MarketConfig& market, double daily_volume,
                                    VolumeProfile profile, std::uint64_t noise_seed) {
  if (!(market.sigma > 0)) throw DomainError("market: sigma must be positive");
  if (!(market.noise_scale >= 0)) throw DomainError("market: noise_scale must be non-negative");
  if (!(market.open_price > 0)) throw DomainError("market: open price must be positive");
  SyntheticMarketDay day;
  day.symbol = symbol;
  day.date = date;
  day.bars = session_bars(date, daily_volume, profile, market.open_price);
  day.orders = std::move(orders);
  const auto clock = VolumeClock::from_bars(day.bars);
  std::mt19937_64 noise_rng(noise_seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  double w = 0;
  double v_prev = 0;
  double prev_close = market.open_price;
  double hi = market.open_price;
  double lo = market.open_price;
  std::size_t hi_bar = 0;
  for (std::size_t k = 0; k < day.bars.size(); ++k) {
    auto& bar = day.bars[k];
    const double v = clock.volume_time(bar.minute + 1.0);
    w += market.noise_scale * std::sqrt(std::max(0.0, v - v_prev)) * normal(noise_rng);
    v_prev = v;
    double s = w;
    for (const auto& o : day.orders) {
      if (v <= o.v_start) continue;
      s += o.order.sign *
           model_trajectory(model, o.truth.eta, o.truth.duration_f, (v - o.v_start) / o.truth.duration_f);
    }
    bar.open = prev_close;
    bar.close = market.open_price * std::exp(market.sigma * s);
    bar.high = std::max(bar.open, bar.close);
    bar.low = std::min(bar.open, bar.close);
    prev_close = bar.close;
    if (bar.high > hi) {
      hi = bar.high;
      hi_bar = k;
    }
    lo = std::min(lo, bar.low);
  }
  const double range = (hi - lo) / market.open_price;
  if (range <= market.sigma) {
    // Extend one wick so the range proxy equals sigma exactly.
    auto& wick = day.bars[hi_bar].high;
    wick = lo + market.sigma * market.open_price;
    // Nudge by ulps until the proxy reproduces sigma bit for bit.
    for (int i = 0; i < 8; ++i) {
      const double proxy = daily_volatility_proxy(day.bars);
      if (proxy == market.sigma) break;
      wick = std::nextafter(wick, proxy < market.sigma ? INFINITY : -INFINITY);
    }
    wick = std::max(wick, std::max(day.bars[hi_bar].open, day.bars[hi_bar].close));
    day.sigma_pinned = daily_volatility_proxy(day.bars) == market.sigma;
  }
  day.sigma_proxy = daily_volatility_proxy(day.bars);
  return day;
}

std::vector<SyntheticMarketDay> generate_market(const PopulationConfig& cfg,
                                                const ImpactModel& model,
                                                const MarketConfig& market) {
  cfg.validate();
  std::vector<SyntheticMarketDay> days;
  for (const auto& slot : make_slots(cfg)) {
    std::vector<SyntheticOrder> orders;
    if (slot.n_orders > 0) {
      const auto clock =
          VolumeClock::from_bars(session_bars(slot.date, cfg.daily_volume, cfg.profile, market.open_price));
      std::mt19937_64 rng(derive_seed(cfg.seed, slot.index));
      orders = slot_orders(cfg, slot, clock, rng);
    }
    days.push_back(build_market_day(slot.symbol, slot.date, std::move(orders), model, market,
                                    cfg.daily_volume, cfg.profile,
                                    derive_seed(derive_seed(cfg.seed, slot.index), 1)));
  }
  return days;
}

std::vector<OrderPath> independent_paths(const std::vector<SyntheticOrder>& population,
                                         const ImpactModel& model, const PathConfig& cfg,
                                         std::uint64_t seed) {
  if (!(cfg.horizon_multiple >= 1) || cfg.points_per_unit < 1 || !(cfg.noise_scale >= 0)) {
    throw DomainError("independent_paths: invalid path configuration");
  }
  const int n = static_cast<int>(std::ceil(cfg.horizon_multiple * cfg.points_per_unit - 1e-9));
  std::vector<OrderPath> out;
  out.reserve(population.size());
  for (std::size_t i = 0; i < population.size(); ++i) {
    const auto& t = population[i].truth;
    std::mt19937_64 rng(derive_seed(seed, i));
    std::normal_distribution<double> normal(0.0, 1.0);
    OrderPath path;
    path.eta = t.eta;
    path.duration_f = t.duration_f;
    path.pi = t.pi;
    path.v.resize(static_cast<std::size_t>(n + 1));
    path.impact.resize(static_cast<std::size_t>(n + 1));
    const double dv = t.duration_f / cfg.points_per_unit;
    double w = 0;
    for (int j = 0; j <= n; ++j) {
      const double z = static_cast<double>(j) / cfg.points_per_unit;
      if (j > 0) w += cfg.noise_scale * std::sqrt(dv) * normal(rng);
      path.v[static_cast<std::size_t>(j)] = j == cfg.points_per_unit ? t.duration_f : z * t.duration_f;
      path.impact[static_cast<std::size_t>(j)] = model_trajectory(model, t.eta, t.duration_f, z) + w;
    }
    out.push_back(std::move(path));
  }
  return out;
}

}  // namespace mimpact
