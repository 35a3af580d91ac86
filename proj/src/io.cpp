#include "mimpact/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "mimpact/errors.hpp"

namespace mimpact {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

double parse_number(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw DataError("invalid number '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto next = line.find(',', pos);
    auto field = line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.remove_suffix(1);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    out.push_back(field);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

namespace {

template <typename Row, typename ParseRow>
std::vector<Row> read_table(std::istream& in, const std::string& source, std::string_view header,
                            ParseDiagnostics* diag, ParseRow parse_row) {
  ParseDiagnostics local;
  ParseDiagnostics& d = diag ? *diag : local;
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  std::size_t file_rows = 0;
  std::size_t file_bad = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!seen_header) {
      if (line != header) {
        throw DataError(source + ":" + std::to_string(line_no) + ": expected header '" +
                        std::string(header) + "'");
      }
      seen_header = true;
      continue;
    }
    ++file_rows;
    try {
      rows.push_back(parse_row(split_csv(line)));
    } catch (const std::exception& e) {
      ++file_bad;
      d.messages.push_back(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!seen_header) throw DataError(source + ": missing header '" + std::string(header) + "'");
  d.rows += file_rows;
  d.malformed += file_bad;
  if (file_rows > 0 &&
      static_cast<double>(file_bad) > kMaxMalformedFraction * static_cast<double>(file_rows)) {
    throw DataError(source + ": " + std::to_string(file_bad) + " of " + std::to_string(file_rows) +
                    " rows malformed, aborting");
  }
  return rows;
}

void expect_fields(const std::vector<std::string_view>& f, std::size_t n) {
  if (f.size() != n) {
    throw DataError("expected " + std::to_string(n) + " fields, got " + std::to_string(f.size()));
  }
}

std::pair<Date, double> parse_timestamp(std::string_view text) {
  if (text.size() < 16 || (text[10] != 'T' && text[10] != ' ')) {
    throw DataError("invalid timestamp '" + std::string(text) + "', expected YYYY-MM-DDTHH:MM");
  }
  return {Date::parse(text.substr(0, 10)), parse_clock(text.substr(11))};
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

std::string format_timestamp(const Date& date, double minute_of_day) {
  return date.iso() + "T" + format_clock(minute_of_day);
}

std::vector<MinuteBar> read_bars(std::istream& in, const std::string& source,
                                 ParseDiagnostics* diag) {
  return read_table<MinuteBar>(
      in, source, "date,time,open,high,low,close,volume", diag, [](const auto& f) {
        expect_fields(f, 7);
        MinuteBar b;
        b.date = Date::parse(f[0]);
        const double minute = parse_clock(f[1]);
        if (minute != std::floor(minute)) throw DataError("bar time must be a whole minute");
        b.minute = static_cast<int>(minute);
        b.open = parse_number(f[2]);
        b.high = parse_number(f[3]);
        b.low = parse_number(f[4]);
        b.close = parse_number(f[5]);
        b.volume = parse_number(f[6]);
        if (!b.consistent()) throw DataError("inconsistent OHLCV values");
        return b;
      });
}

std::vector<MinuteBar> read_bars_file(const std::filesystem::path& path, ParseDiagnostics* diag) {
  auto in = open_input(path);
  return read_bars(in, path.string(), diag);
}

void write_bars(std::ostream& out, const std::vector<MinuteBar>& bars) {
  out << "date,time,open,high,low,close,volume\n";
  for (const auto& b : bars) {
    out << b.date.iso() << ',' << format_clock(b.minute) << ',' << format_number(b.open) << ','
        << format_number(b.high) << ',' << format_number(b.low) << ',' << format_number(b.close)
        << ',' << format_number(b.volume) << '\n';
  }
}

std::vector<Metaorder> read_metaorders(std::istream& in, const std::string& source,
                                       ParseDiagnostics* diag) {
  return read_table<Metaorder>(in, source, "symbol,sign,volume,start,end", diag, [](const auto& f) {
    expect_fields(f, 5);
    Metaorder o;
    if (f[0].empty()) throw DataError("empty symbol");
    o.symbol = std::string(f[0]);
    const double sign = parse_number(f[1]);
    if (sign != 1.0 && sign != -1.0) throw DataError("sign must be +1 or -1");
    o.sign = static_cast<int>(sign);
    o.volume = parse_number(f[2]);
    const auto [d0, t0] = parse_timestamp(f[3]);
    const auto [d1, t1] = parse_timestamp(f[4]);
    if (d0 != d1) throw DataError("metaorder spans more than one day");
    o.date = d0;
    o.start = t0;
    o.end = t1;
    o.validate();
    return o;
  });
}

std::vector<Metaorder> read_metaorders_file(const std::filesystem::path& path,
                                            ParseDiagnostics* diag) {
  auto in = open_input(path);
  return read_metaorders(in, path.string(), diag);
}

void write_metaorders(std::ostream& out, const std::vector<Metaorder>& orders) {
  out << "symbol,sign,volume,start,end\n";
  for (const auto& o : orders) {
    out << o.symbol << ',' << (o.sign > 0 ? "+1" : "-1") << ',' << format_number(o.volume) << ','
        << format_timestamp(o.date, o.start) << ',' << format_timestamp(o.date, o.end) << '\n';
  }
}

std::map<DayKey, std::vector<MinuteBar>> read_bars_directory(const std::filesystem::path& dir,
                                                             ParseDiagnostics* diag) {
  if (!std::filesystem::is_directory(dir)) throw DataError("no-data: " + dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  if (files.empty()) throw DataError("no-data: no bar files in " + dir.string());
  std::sort(files.begin(), files.end());
  std::map<DayKey, std::vector<MinuteBar>> out;
  for (const auto& path : files) {
    const std::string symbol = path.stem().string();
    for (auto& bar : read_bars_file(path, diag)) {
      out[DayKey{symbol, bar.date}].push_back(bar);
    }
  }
  for (auto& [key, bars] : out) {
    std::stable_sort(bars.begin(), bars.end(),
                     [](const MinuteBar& a, const MinuteBar& b) { return a.minute < b.minute; });
  }
  return out;
}

}  // namespace mimpact
