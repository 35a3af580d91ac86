#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mimpact {

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;

  /// Parses YYYY-MM-DD.
  static Date parse(std::string_view text);
  std::string iso() const;
  /// Days since 1970-01-01.
  std::int64_t serial() const;
  static Date from_serial(std::int64_t serial);
  /// Next Monday-to-Friday date.
  Date next_weekday() const;
};

/// Minute of day for "HH:MM" (seconds optional).
double parse_clock(std::string_view text);
std::string format_clock(double minute_of_day);

inline constexpr double kMarketOpen = 9 * 60 + 30;
inline constexpr double kMarketClose = 16 * 60;

struct MinuteBar {
  Date date;
  int minute = 0;  // minute of day; the bar covers [minute, minute + 1)
  double open = 0;
  double high = 0;
  double low = 0;
  double close = 0;
  double volume = 0;

  bool consistent() const;
};

struct Metaorder {
  std::string symbol;
  int sign = 1;  // +1 buy, -1 sell
  double volume = 0;
  Date date;
  double start = 0;  // wall-clock minute of day
  double end = 0;

  double duration_minutes() const { return end - start; }
  void validate() const;
};

/// Piecewise-linear map from wall-clock minute to volume time v in [0, 1].
class VolumeClock {
 public:
  static VolumeClock from_bars(std::span<const MinuteBar> bars);

  const Date& day() const { return day_; }
  double total_volume() const { return total_volume_; }
  double open_minute() const { return minutes_.front(); }
  double close_minute() const { return minutes_.back(); }

  /// v(t); clamps outside the session.
  double volume_time(double minute) const;
  /// V(t), the traded volume since the open.
  double cumulative_volume(double minute) const { return volume_time(minute) * total_volume_; }
  /// Earliest wall-clock minute at which volume time reaches v.
  double wall_clock(double v) const;

  std::span<const double> knot_minutes() const { return minutes_; }
  std::span<const double> knot_fractions() const { return fractions_; }

 private:
  Date day_;
  double total_volume_ = 0;
  std::vector<double> minutes_;
  std::vector<double> fractions_;
};

struct ExecutionDescriptors {
  double eta = 0;         // participation rate
  double duration_f = 0;  // duration in volume time
  double pi = 0;          // daily fraction, eta * duration_f
};

/// Per-(symbol, day) market state used to measure impact.
struct DayContext {
  double sigma_d = 0;
  VolumeClock clock;
  std::vector<double> v;  // volume time of each price sample
  std::vector<double> s;  // log-price / sigma_d
  std::vector<std::pair<double, double>> gaps;  // missing-minute spans [from, to)

  bool degenerate() const { return !(sigma_d > 0); }
  /// s(v), linear between samples.
  double s_at(double v) const;
  bool has_gap(double from_minute, double to_minute) const;
};

struct FilterConfig {
  std::optional<std::set<std::string>> symbol_whitelist;
  double latest_end = 16 * 60 + 1;
  double min_duration_minutes = 2;
  double max_eta = 0.3;

  void validate() const;
};

struct DayKey {
  std::string symbol;
  Date date;
  auto operator<=>(const DayKey&) const = default;
};

using DayContextMap = std::map<DayKey, DayContext>;

struct FilteredOrder {
  Metaorder order;
  ExecutionDescriptors descriptors;
};

/// Survivors after each filter stage, in the layout of a raw / F1..F4 table.
struct FilterReport {
  std::size_t raw = 0;
  std::size_t after_filter1 = 0;
  std::size_t after_filter2 = 0;
  std::size_t after_filter3 = 0;
  std::size_t after_filter4 = 0;
  std::size_t no_data = 0;      // no context for the order's day (or undefined eta)
  std::size_t rejected_filter1 = 0;
  std::size_t rejected_filter2 = 0;
  std::size_t rejected_filter3 = 0;
  std::size_t rejected_filter4 = 0;
};

struct FilterResult {
  std::vector<FilteredOrder> survivors;
  FilterReport report;
};

struct ImpactSeries {
  double v_start = 0;
  double v_end = 0;
  std::vector<double> v;       // volume time; values above 1 belong to the next day
  std::vector<double> impact;  // sign * (s(v) - s(v_start))
  bool gap_interpolated = false;
  bool crosses_day = false;
};

double daily_volatility_proxy(std::span<const MinuteBar> bars);

DayContext make_day_context(std::span<const MinuteBar> bars);

ExecutionDescriptors compute_descriptors(const Metaorder& order, const VolumeClock& clock);

FilterResult apply_filters(std::span<const Metaorder> orders, const DayContextMap& contexts,
                           const FilterConfig& cfg);

/// Impact path of `order` sampled at every bar boundary in (v_start, horizon].
/// `horizon` is in volume time; values above 1 continue into `next_day` when given,
/// otherwise the series stops at the close.
ImpactSeries impact_series(const Metaorder& order, const DayContext& ctx, double horizon,
                           const DayContext* next_day = nullptr);

}  // namespace mimpact
