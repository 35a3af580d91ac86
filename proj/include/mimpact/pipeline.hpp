#pragma once

#include <filesystem>
#include <vector>

#include "mimpact/core_types.hpp"
#include "mimpact/estimation.hpp"
#include "mimpact/io.hpp"
#include "mimpact/synth.hpp"

namespace mimpact {

/// Metaorders with per-day market state, after filtering.
struct Dataset {
  std::vector<Metaorder> raw;
  DayContextMap contexts;
  FilterResult filtered;
  ParseDiagnostics diagnostics;
  std::size_t degenerate_days = 0;
};

DayContextMap build_contexts(const std::map<DayKey, std::vector<MinuteBar>>& bars,
                             std::size_t* degenerate_days = nullptr);

Dataset ingest(const std::filesystem::path& metaorders, const std::filesystem::path& bars_dir,
               const FilterConfig& filters);

Dataset dataset_from_market(const std::vector<SyntheticMarketDay>& days, const FilterConfig& filters);

/// Writes `metaorders.csv` and `bars/<SYMBOL>.csv` under `dir`, returning the paths written.
/// A non-empty `comment` is emitted as a leading `# ...` line in each file.
std::vector<std::filesystem::path> write_market(const std::vector<SyntheticMarketDay>& days,
                                                const std::filesystem::path& dir,
                                                const std::string& comment = "");

struct PathStats {
  std::size_t degenerate = 0;  // sigma_d = 0 days
  std::size_t gap_flagged = 0;
};

/// Impact paths of the surviving orders, followed to v_start + horizon_multiple * F.
std::vector<OrderPath> market_paths(const Dataset& data, double horizon_multiple, bool cross_day,
                                    PathStats* stats = nullptr);

}  // namespace mimpact
