#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mimpact/core_types.hpp"

namespace mimpact {

/// Shortest decimal text that parses back to exactly `x`.
std::string format_number(double x);

double parse_number(std::string_view text);

/// Splits a comma-separated line; no quoting support (none of our formats need it).
std::vector<std::string_view> split_csv(std::string_view line);

struct ParseDiagnostics {
  std::size_t rows = 0;
  std::size_t malformed = 0;
  std::vector<std::string> messages;  // "file:line: reason"
};

/// Fraction of malformed rows above which a reader aborts with DataError.
inline constexpr double kMaxMalformedFraction = 0.10;

/// Reads `date,time,open,high,low,close,volume`. Lines starting with '#' are skipped.
std::vector<MinuteBar> read_bars(std::istream& in, const std::string& source,
                                 ParseDiagnostics* diag = nullptr);
std::vector<MinuteBar> read_bars_file(const std::filesystem::path& path,
                                      ParseDiagnostics* diag = nullptr);
void write_bars(std::ostream& out, const std::vector<MinuteBar>& bars);

/// Reads `symbol,sign,volume,start,end` with timestamps `YYYY-MM-DDTHH:MM`.
std::vector<Metaorder> read_metaorders(std::istream& in, const std::string& source,
                                       ParseDiagnostics* diag = nullptr);
std::vector<Metaorder> read_metaorders_file(const std::filesystem::path& path,
                                            ParseDiagnostics* diag = nullptr);
void write_metaorders(std::ostream& out, const std::vector<Metaorder>& orders);

std::string format_timestamp(const Date& date, double minute_of_day);

/// Bars for every `<SYMBOL>.csv` in `dir`, keyed by (symbol, day).
std::map<DayKey, std::vector<MinuteBar>> read_bars_directory(const std::filesystem::path& dir,
                                                             ParseDiagnostics* diag = nullptr);

}  // namespace mimpact
