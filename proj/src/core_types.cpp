#include "mimpact/core_types.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "mimpact/errors.hpp"

namespace mimpact {

namespace {

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw DataError("invalid " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

Date Date::parse(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw DataError("invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
  }
  Date d{parse_int(text.substr(0, 4), "year"), parse_int(text.substr(5, 2), "month"),
         parse_int(text.substr(8, 2), "day")};
  const std::chrono::year_month_day ymd{std::chrono::year{d.year},
                                        std::chrono::month{static_cast<unsigned>(d.month)},
                                        std::chrono::day{static_cast<unsigned>(d.day)}};
  if (!ymd.ok()) throw DataError("invalid calendar date '" + std::string(text) + "'");
  return d;
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::int64_t Date::serial() const {
  const std::chrono::year_month_day ymd{std::chrono::year{year},
                                        std::chrono::month{static_cast<unsigned>(month)},
                                        std::chrono::day{static_cast<unsigned>(day)}};
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

Date Date::from_serial(std::int64_t serial) {
  const std::chrono::sys_days days{std::chrono::days{serial}};
  const std::chrono::year_month_day ymd{days};
  return Date{static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())),
              static_cast<int>(static_cast<unsigned>(ymd.day()))};
}

Date Date::next_weekday() const {
  auto s = serial() + 1;
  for (;;) {
    const std::chrono::weekday wd{std::chrono::sys_days{std::chrono::days{s}}};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) return from_serial(s);
    ++s;
  }
}

double parse_clock(std::string_view text) {
  if (text.size() != 5 && text.size() != 8) {
    throw DataError("invalid time '" + std::string(text) + "', expected HH:MM");
  }
  if (text[2] != ':' || (text.size() == 8 && text[5] != ':')) {
    throw DataError("invalid time '" + std::string(text) + "', expected HH:MM");
  }
  const int hh = parse_int(text.substr(0, 2), "hour");
  const int mm = parse_int(text.substr(3, 2), "minute");
  const int ss = text.size() == 8 ? parse_int(text.substr(6, 2), "second") : 0;
  if (hh > 23 || mm > 59 || ss > 59) throw DataError("time out of range '" + std::string(text) + "'");
  return hh * 60.0 + mm + ss / 60.0;
}

std::string format_clock(double minute_of_day) {
  const long total_seconds = std::lround(minute_of_day * 60.0);
  const long hh = total_seconds / 3600;
  const long mm = (total_seconds / 60) % 60;
  const long ss = total_seconds % 60;
  char buf[48];
  if (ss == 0) {
    std::snprintf(buf, sizeof buf, "%02ld:%02ld", hh, mm);
  } else {
    std::snprintf(buf, sizeof buf, "%02ld:%02ld:%02ld", hh, mm, ss);
  }
  return buf;
}

bool MinuteBar::consistent() const {
  return low <= open && low <= close && open <= high && close <= high && volume >= 0 && low > 0;
}

void Metaorder::validate() const {
  if (sign != 1 && sign != -1) throw DataError("metaorder sign must be +1 or -1");
  if (!(volume > 0)) throw DataError("metaorder volume must be positive");
  if (!(start < end)) throw DataError("metaorder start must precede its end");
}

// ---------------------------------------------------------------------------

VolumeClock VolumeClock::from_bars(std::span<const MinuteBar> bars) {
  if (bars.empty()) throw DataError("volume clock needs at least one bar");
  VolumeClock clock;
  clock.day_ = bars.front().date;
  double cumulative = 0;
  clock.minutes_.push_back(bars.front().minute);
  std::vector<double> volumes{0.0};
  int previous = bars.front().minute - 1;
  for (const auto& bar : bars) {
    if (bar.date != clock.day_) throw DataError("volume clock bars span more than one day");
    if (bar.minute <= previous) throw DataError("bars must be sorted by strictly increasing time");
    if (!(bar.volume >= 0)) throw DataError("negative bar volume");
    if (bar.minute > clock.minutes_.back()) {
      // Missing minutes trade nothing: volume time stays flat across the gap.
      clock.minutes_.push_back(bar.minute);
      volumes.push_back(cumulative);
    }
    cumulative += bar.volume;
    clock.minutes_.push_back(bar.minute + 1.0);
    volumes.push_back(cumulative);
    previous = bar.minute;
  }
  if (!(cumulative > 0)) throw DataError("zero total volume on " + clock.day_.iso());
  clock.total_volume_ = cumulative;
  clock.fractions_.reserve(volumes.size());
  for (double v : volumes) clock.fractions_.push_back(v / cumulative);
  clock.fractions_.back() = 1.0;
  return clock;
}

double VolumeClock::volume_time(double minute) const {
  if (minute <= minutes_.front()) return 0.0;
  if (minute >= minutes_.back()) return 1.0;
  const auto it = std::upper_bound(minutes_.begin(), minutes_.end(), minute);
  const auto i = static_cast<std::size_t>(it - minutes_.begin());
  const double m0 = minutes_[i - 1];
  const double m1 = minutes_[i];
  const double w = (minute - m0) / (m1 - m0);
  return fractions_[i - 1] + w * (fractions_[i] - fractions_[i - 1]);
}

double VolumeClock::wall_clock(double v) const {
  if (v <= 0) return minutes_.front();
  if (v >= 1) {
    // Earliest minute at which the whole day's volume has traded.
    const auto it = std::lower_bound(fractions_.begin(), fractions_.end(), 1.0);
    return minutes_[static_cast<std::size_t>(it - fractions_.begin())];
  }
  const auto it = std::lower_bound(fractions_.begin(), fractions_.end(), v);
  const auto i = static_cast<std::size_t>(it - fractions_.begin());
  if (i == 0) return minutes_.front();
  const double f0 = fractions_[i - 1];
  const double f1 = fractions_[i];
  return minutes_[i - 1] + (v - f0) / (f1 - f0) * (minutes_[i] - minutes_[i - 1]);
}

// ---------------------------------------------------------------------------

double DayContext::s_at(double at) const {
  if (s.empty()) throw DomainError("price path undefined on a degenerate day");
  const auto it = std::upper_bound(v.begin(), v.end(), at);
  if (it == v.begin()) return s.front();
  if (it == v.end()) return s.back();
  const auto i = static_cast<std::size_t>(it - v.begin());
  const double w = (at - v[i - 1]) / (v[i] - v[i - 1]);
  return s[i - 1] + w * (s[i] - s[i - 1]);
}

bool DayContext::has_gap(double from_minute, double to_minute) const {
  return std::any_of(gaps.begin(), gaps.end(), [&](const auto& g) {
    return g.first < to_minute && g.second > from_minute;
  });
}

double daily_volatility_proxy(std::span<const MinuteBar> bars) {
  if (bars.empty()) throw DataError("volatility proxy needs a non-empty day");
  const double first_open = bars.front().open;
  if (!(first_open > 0)) throw DataError("first open must be positive");
  double hi = bars.front().high;
  double lo = bars.front().low;
  for (const auto& b : bars) {
    hi = std::max(hi, b.high);
    lo = std::min(lo, b.low);
  }
  return (hi - lo) / first_open;
}

DayContext make_day_context(std::span<const MinuteBar> bars) {
  DayContext ctx;
  ctx.clock = VolumeClock::from_bars(bars);
  ctx.sigma_d = daily_volatility_proxy(bars);
  for (std::size_t k = 0; k + 1 < bars.size(); ++k) {
    if (bars[k + 1].minute > bars[k].minute + 1) {
      ctx.gaps.emplace_back(bars[k].minute + 1.0, static_cast<double>(bars[k + 1].minute));
    }
  }
  if (ctx.degenerate()) return ctx;
  ctx.v.reserve(bars.size() + 1);
  ctx.s.reserve(bars.size() + 1);
  ctx.v.push_back(0.0);
  ctx.s.push_back(std::log(bars.front().open) / ctx.sigma_d);
  for (const auto& bar : bars) {
    const double v = ctx.clock.volume_time(bar.minute + 1.0);
    const double s = std::log(bar.close) / ctx.sigma_d;
    if (v == ctx.v.back()) {
      // Zero-volume bar: keep the latest price at this volume time.
      ctx.s.back() = s;
    } else {
      ctx.v.push_back(v);
      ctx.s.push_back(s);
    }
  }
  return ctx;
}

ExecutionDescriptors compute_descriptors(const Metaorder& order, const VolumeClock& clock) {
  if (order.date != clock.day()) throw DomainError("metaorder and volume clock are on different days");
  const double vs = clock.volume_time(order.start);
  const double ve = clock.volume_time(order.end);
  const double f = ve - vs;
  const double market_volume = f * clock.total_volume();
  if (!(market_volume > 0)) {
    throw DataError("zero market volume during metaorder on " + order.date.iso() + " " +
                    order.symbol);
  }
  ExecutionDescriptors d;
  d.duration_f = f;
  d.eta = order.volume / market_volume;
  d.pi = order.volume / clock.total_volume();
  return d;
}

void FilterConfig::validate() const {
  if (!(max_eta > 0 && max_eta <= 1)) throw DomainError("max_eta must lie in (0, 1]");
  if (!(min_duration_minutes >= 0)) throw DomainError("min_duration_minutes must be non-negative");
}

FilterResult apply_filters(std::span<const Metaorder> orders, const DayContextMap& contexts,
                           const FilterConfig& cfg) {
  cfg.validate();
  FilterResult result;
  auto& rep = result.report;
  rep.raw = orders.size();
  for (const auto& o : orders) {
    if (cfg.symbol_whitelist && !cfg.symbol_whitelist->contains(o.symbol)) {
      ++rep.rejected_filter1;
      continue;
    }
    if (!(o.end < cfg.latest_end)) {
      ++rep.rejected_filter2;
      continue;
    }
    if (!(o.duration_minutes() > cfg.min_duration_minutes)) {
      ++rep.rejected_filter3;
      continue;
    }
    const auto it = contexts.find(DayKey{o.symbol, o.date});
    if (it == contexts.end()) {
      ++rep.no_data;
      continue;
    }
    ExecutionDescriptors d;
    try {
      d = compute_descriptors(o, it->second.clock);
    } catch (const DataError&) {
      ++rep.no_data;
      continue;
    }
    if (!(d.eta < cfg.max_eta)) {
      ++rep.rejected_filter4;
      continue;
    }
    result.survivors.push_back(FilteredOrder{o, d});
  }
  rep.after_filter1 = rep.raw - rep.rejected_filter1;
  rep.after_filter2 = rep.after_filter1 - rep.rejected_filter2;
  rep.after_filter3 = rep.after_filter2 - rep.rejected_filter3;
  rep.after_filter4 = result.survivors.size();
  return result;
}

ImpactSeries impact_series(const Metaorder& order, const DayContext& ctx, double horizon,
                           const DayContext* next_day) {
  if (ctx.degenerate()) throw DomainError("sigma_d = 0: impact undefined on " + order.date.iso());
  if (order.date != ctx.clock.day()) throw DomainError("metaorder and day context differ");
  ImpactSeries out;
  out.v_start = ctx.clock.volume_time(order.start);
  out.v_end = ctx.clock.volume_time(order.end);
  if (horizon < out.v_end) throw DomainError("horizon precedes the end of the metaorder");
  const double eps = static_cast<double>(order.sign);
  const double s0 = ctx.s_at(out.v_start);
  const double same_day_horizon = std::min(horizon, 1.0);
  // Horizons are sums of volume times; let a sample sitting on the boundary through.
  const double slack = 1e-12;

  out.v.push_back(out.v_start);
  out.impact.push_back(0.0);
  bool end_emitted = false;
  auto emit = [&](double v, double s) {
    if (v <= out.v.back()) return;
    out.v.push_back(v);
    out.impact.push_back(eps * (s - s0));
  };
  for (std::size_t k = 0; k < ctx.v.size(); ++k) {
    const double v = ctx.v[k];
    if (v <= out.v_start) continue;
    if (v > same_day_horizon + slack) break;
    if (!end_emitted && v > out.v_end) {
      emit(out.v_end, ctx.s_at(out.v_end));
      end_emitted = true;
    }
    if (v == out.v_end) end_emitted = true;
    emit(v, ctx.s[k]);
  }
  if (!end_emitted) emit(out.v_end, ctx.s_at(out.v_end));
  out.gap_interpolated =
      ctx.has_gap(order.start, ctx.clock.wall_clock(same_day_horizon));

  if (horizon > 1.0 && next_day != nullptr && !next_day->degenerate()) {
    // Continue on the next session, still rescaled by this day's sigma_d; the
    // overnight return lands in the first sampled minute.
    const double rescale = next_day->sigma_d / ctx.sigma_d;
    for (std::size_t k = 1; k < next_day->v.size(); ++k) {
      const double v = 1.0 + next_day->v[k];
      if (v > horizon + slack) break;
      emit(v, next_day->s[k] * rescale);
      out.crosses_day = true;
    }
  }
  return out;
}

}  // namespace mimpact
