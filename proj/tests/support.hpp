#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "mimpact/core_types.hpp"

namespace mimpact::test {

/// Small deterministic generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  bool coin() { return integer(0, 1) == 1; }
  template <class T>
  void shuffle(std::vector<T>& v) { std::shuffle(v.begin(), v.end(), rng_); }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline double rel_err(double got, double want) {
  return std::fabs(got - want) / std::max(std::fabs(want), 1e-300);
}

/// A full 09:30-16:00 session with constant per-minute volume and closes from `price(k)`,
/// k the bar index; each bar opens at the previous close.
inline std::vector<MinuteBar> make_session(const Date& date, const std::function<double(int)>& price,
                                           double volume_per_minute = 1000.0, double open = 100.0) {
  std::vector<MinuteBar> bars;
  double prev = open;
  for (int k = 0; k < 390; ++k) {
    MinuteBar b;
    b.date = date;
    b.minute = static_cast<int>(kMarketOpen) + k;
    b.open = prev;
    b.close = price(k);
    b.high = std::max(b.open, b.close);
    b.low = std::min(b.open, b.close);
    b.volume = volume_per_minute;
    prev = b.close;
    bars.push_back(b);
  }
  return bars;
}

inline Metaorder make_order(const std::string& symbol, const Date& date, int sign, double volume,
                            double start, double end) {
  Metaorder o;
  o.symbol = symbol;
  o.date = date;
  o.sign = sign;
  o.volume = volume;
  o.start = start;
  o.end = end;
  return o;
}

}  // namespace mimpact::test
