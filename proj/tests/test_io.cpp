#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mimpact/errors.hpp"
#include "mimpact/io.hpp"
#include "support.hpp"

using namespace mimpact;
using namespace mimpact::test;

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mimpact_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("numbers round trip through text") {
  Gen g(21);
  for (int i = 0; i < 2000; ++i) {
    const double x = g.normal() * std::pow(10.0, g.integer(-300, 300));
    CHECK(parse_number(format_number(x)) == x);
  }
  CHECK_THROWS_AS(parse_number("1.5x"), DataError);
  CHECK_THROWS_AS(parse_number(""), DataError);
}

TEST_CASE("bars round trip losslessly") {
  Gen g(22);
  const Date day{2024, 5, 6};
  auto bars = make_session(day, [&](int) { return 100 * std::exp(0.01 * g.normal()); });
  for (auto& b : bars) b.volume = g.uniform(0, 1e6);
  std::stringstream buf;
  write_bars(buf, bars);
  const auto back = read_bars(buf, "mem");
  REQUIRE(back.size() == bars.size());
  for (std::size_t k = 0; k < bars.size(); ++k) {
    CHECK(back[k].date == bars[k].date);
    CHECK(back[k].minute == bars[k].minute);
    CHECK(back[k].open == bars[k].open);
    CHECK(back[k].high == bars[k].high);
    CHECK(back[k].low == bars[k].low);
    CHECK(back[k].close == bars[k].close);
    CHECK(back[k].volume == bars[k].volume);
  }
}

TEST_CASE("metaorders round trip losslessly") {
  const Date day{2024, 5, 6};
  std::vector<Metaorder> orders{make_order("ABC", day, 1, 1234.5, 600, 630),
                                make_order("XYZ", day, -1, 0.125, 571, 959)};
  std::stringstream buf;
  write_metaorders(buf, orders);
  CHECK(buf.str().find("ABC,+1,") != std::string::npos);
  const auto back = read_metaorders(buf, "mem");
  REQUIRE(back.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(back[k].symbol == orders[k].symbol);
    CHECK(back[k].sign == orders[k].sign);
    CHECK(back[k].volume == orders[k].volume);
    CHECK(back[k].date == orders[k].date);
    CHECK(back[k].start == orders[k].start);
    CHECK(back[k].end == orders[k].end);
  }
}

TEST_CASE("malformed rows are skipped with line numbers") {
  std::stringstream in;
  in << "# comment\n"
     << "symbol,sign,volume,start,end\n";
  for (int k = 0; k < 19; ++k) in << "AAA,+1,100,2024-01-02T10:00,2024-01-02T10:30\n";
  in << "AAA,+2,100,2024-01-02T10:00,2024-01-02T10:30\n";  // line 22
  ParseDiagnostics diag;
  const auto orders = read_metaorders(in, "orders.csv", &diag);
  CHECK(orders.size() == 19);
  CHECK(diag.rows == 20);
  CHECK(diag.malformed == 1);
  REQUIRE(diag.messages.size() == 1);
  CHECK(diag.messages[0].rfind("orders.csv:22:", 0) == 0);
}

TEST_CASE("too many malformed rows abort") {
  std::stringstream in;
  in << "date,time,open,high,low,close,volume\n";
  for (int k = 0; k < 8; ++k) in << "2024-01-02,10:0" << k << ",1,1,1,1,1\n";
  in << "2024-01-02,10:08,1,1,1,1\n";
  in << "2024-01-02,10:09,abc,1,1,1,1\n";
  CHECK_THROWS_AS(read_bars(in, "bars.csv"), DataError);
}

TEST_CASE("wrong header is rejected") {
  std::stringstream in;
  in << "symbol,side,volume,start,end\n";
  CHECK_THROWS_AS(read_metaorders(in, "x"), DataError);
}

TEST_CASE("bars directory") {
  const auto empty = scratch_dir("empty");
  try {
    read_bars_directory(empty);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("no-data") != std::string::npos);
  }

  const auto dir = scratch_dir("two");
  const Date d1{2024, 5, 6}, d2{2024, 5, 7};
  for (const char* sym : {"AAA", "BBB"}) {
    auto bars = make_session(d1, [](int) { return 50.0; });
    const auto more = make_session(d2, [](int) { return 51.0; });
    bars.insert(bars.end(), more.begin(), more.end());
    std::ofstream out(dir / (std::string(sym) + ".csv"));
    write_bars(out, bars);
  }
  const auto all = read_bars_directory(dir);
  CHECK(all.size() == 4);
  CHECK(all.at(DayKey{"BBB", d2}).size() == 390);
  fs::remove_all(dir);
  fs::remove_all(empty);
}
