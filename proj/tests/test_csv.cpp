#include <doctest.h>

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "kgsm/csv.hpp"
#include "kgsm/rng.hpp"

using namespace kgsm;

namespace {

csv::Table parse(const std::string& text) {
  std::istringstream in(text);
  return csv::read(in);
}

double parse_double(const std::string& text) {
  double v = 0.0;
  std::from_chars(text.data(), text.data() + text.size(), v);
  return v;
}

} // namespace

TEST_CASE("format_double round-trips at 17 significant digits") {
  RngStream s(5);
  for (int i = 0; i < 10000; ++i) {
    const double v = std::ldexp(s.standard_normal(), static_cast<int>(s.uniform_index(2000)) - 1000);
    const std::string text = csv::format_double(v);
    CHECK(parse_double(text) == v);
  }
  CHECK(csv::format_double(0.0) == "0");
  CHECK(csv::format_double(0.1) == "0.10000000000000001");
  CHECK(parse_double(csv::format_double(std::numeric_limits<double>::denorm_min())) ==
        std::numeric_limits<double>::denorm_min());
}

TEST_CASE("quoted fields, doubled quotes and CRLF") {
  const auto t = parse("a,b,c\r\n\"x,1\",\"say \"\"hi\"\"\",\"line\nbreak\"\r\n1,2,3\n");
  REQUIRE(t.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][0] == "x,1");
  CHECK(t.rows[0][1] == "say \"hi\"");
  CHECK(t.rows[0][2] == "line\nbreak");
  CHECK_THROWS_AS(t.numeric_column("c"), std::runtime_error);
}

TEST_CASE("empty fields and missing final newline") {
  const auto t = parse("a,b\n,\n1,");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0] == std::vector<std::string>{"", ""});
  CHECK(t.rows[1] == std::vector<std::string>{"1", ""});
}

TEST_CASE("strict reader rejects malformed input") {
  CHECK_THROWS_AS(parse("a,b\n1,2,3\n"), std::runtime_error);
  CHECK_THROWS_AS(parse("a,b\n\"open,2\n"), std::runtime_error);
  CHECK_THROWS_AS(parse("a,b\n\"x\"y,2\n"), std::runtime_error);
  CHECK_THROWS_AS(parse("a,b\nx\"y,2\n"), std::runtime_error);
  CHECK_THROWS_AS(parse(""), std::runtime_error);
}

TEST_CASE("write_row then read is the identity") {
  RngStream s(9);
  const std::string alphabet = "ab,\"\n\r x";
  std::ostringstream out;
  std::vector<std::vector<std::string>> rows;
  csv::write_row(out, {"h1", "h2", "h3"});
  for (int r = 0; r < 300; ++r) {
    std::vector<std::string> row;
    for (int f = 0; f < 3; ++f) {
      std::string field;
      const std::size_t len = s.uniform_index(6);
      for (std::size_t i = 0; i < len; ++i) {
        field += alphabet[s.uniform_index(alphabet.size())];
      }
      row.push_back(field);
    }
    csv::write_row(out, row);
    rows.push_back(row);
  }
  const auto t = parse(out.str());
  CHECK(t.rows == rows);
}

TEST_CASE("numeric columns") {
  const auto t = parse("k,v\n0,1.5\n1,-inf\n2,x\n");
  CHECK_THROWS_AS(t.numeric_column("v"), std::runtime_error);
  CHECK_THROWS_AS(t.column_index("w"), std::out_of_range);
  const auto u = parse("k,v\n0,1.5\n1,-inf\n");
  const auto v = u.numeric_column("v");
  CHECK(v[0] == 1.5);
  CHECK(std::isinf(v[1]));
}
