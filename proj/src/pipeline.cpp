#include "mimpact/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "mimpact/errors.hpp"

namespace mimpact {

DayContextMap build_contexts(const std::map<DayKey, std::vector<MinuteBar>>& bars,
                             std::size_t* degenerate_days) {
  DayContextMap out;
  std::size_t degenerate = 0;
  for (const auto& [key, day_bars] : bars) {
    try {
      auto ctx = make_day_context(day_bars);
      if (ctx.degenerate()) ++degenerate;
      out.emplace(key, std::move(ctx));
    } catch (const DataError&) {
      // Zero-volume days carry no volume clock; their orders count as no-data.
      ++degenerate;
    }
  }
  if (degenerate_days) *degenerate_days = degenerate;
  return out;
}

Dataset ingest(const std::filesystem::path& metaorders, const std::filesystem::path& bars_dir,
               const FilterConfig& filters) {
  Dataset data;
  const auto bars = read_bars_directory(bars_dir, &data.diagnostics);
  if (bars.empty()) throw DataError("no-data: no bars found in " + bars_dir.string());
  data.raw = read_metaorders_file(metaorders, &data.diagnostics);
  data.contexts = build_contexts(bars, &data.degenerate_days);
  data.filtered = apply_filters(data.raw, data.contexts, filters);
  return data;
}

Dataset dataset_from_market(const std::vector<SyntheticMarketDay>& days, const FilterConfig& filters) {
  Dataset data;
  std::map<DayKey, std::vector<MinuteBar>> bars;
  for (const auto& day : days) {
    bars[DayKey{day.symbol, day.date}] = day.bars;
    for (const auto& o : day.orders) data.raw.push_back(o.order);
  }
  data.contexts = build_contexts(bars, &data.degenerate_days);
  data.filtered = apply_filters(data.raw, data.contexts, filters);
  return data;
}

std::vector<std::filesystem::path> write_market(const std::vector<SyntheticMarketDay>& days,
                                                const std::filesystem::path& dir,
                                                const std::string& comment) {
  std::vector<std::filesystem::path> written;
  std::filesystem::create_directories(dir / "bars");
  std::map<std::string, std::vector<MinuteBar>> by_symbol;
  std::vector<Metaorder> orders;
  for (const auto& day : days) {
    auto& dst = by_symbol[day.symbol];
    dst.insert(dst.end(), day.bars.begin(), day.bars.end());
    for (const auto& o : day.orders) orders.push_back(o.order);
  }
  for (auto& [symbol, bars] : by_symbol) {
    std::stable_sort(bars.begin(), bars.end(), [](const MinuteBar& a, const MinuteBar& b) {
      return a.date < b.date || (a.date == b.date && a.minute < b.minute);
    });
    const auto path = dir / "bars" / (symbol + ".csv");
    written.push_back(path);
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    if (!comment.empty()) out << "# " << comment << '\n';
    write_bars(out, bars);
  }
  const auto path = dir / "metaorders.csv";
  written.push_back(path);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  if (!comment.empty()) out << "# " << comment << '\n';
  write_metaorders(out, orders);
  return written;
}

std::vector<OrderPath> market_paths(const Dataset& data, double horizon_multiple, bool cross_day,
                                    PathStats* stats) {
  PathStats local;
  std::vector<OrderPath> out;
  for (const auto& fo : data.filtered.survivors) {
    const auto it = data.contexts.find(DayKey{fo.order.symbol, fo.order.date});
    if (it == data.contexts.end()) continue;
    const auto& ctx = it->second;
    if (ctx.degenerate()) {
      ++local.degenerate;
      continue;
    }
    const DayContext* next = nullptr;
    if (cross_day) {
      auto nx = std::next(it);
      if (nx != data.contexts.end() && nx->first.symbol == fo.order.symbol) next = &nx->second;
    }
    const double vs = ctx.clock.volume_time(fo.order.start);
    const double horizon = vs + horizon_multiple * fo.descriptors.duration_f;
    const auto series = impact_series(fo.order, ctx, horizon, next);
    if (series.gap_interpolated) ++local.gap_flagged;
    OrderPath path;
    path.eta = fo.descriptors.eta;
    path.duration_f = fo.descriptors.duration_f;
    path.pi = fo.descriptors.pi;
    path.crosses_day = series.crosses_day;
    path.v.reserve(series.v.size());
    for (double v : series.v) path.v.push_back(v - series.v_start);
    path.impact = series.impact;
    // Elapsed time at completion equals F exactly up to rounding; pin it.
    for (std::size_t k = 0; k < series.v.size(); ++k) {
      if (series.v[k] == series.v_end) path.v[k] = fo.descriptors.duration_f;
    }
    out.push_back(std::move(path));
  }
  if (stats) *stats = local;
  return out;
}

}  // namespace mimpact
