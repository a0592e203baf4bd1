#include <doctest.h>

#include <cmath>
#include <regex>
#include <sstream>

#include "kgsm/svg.hpp"
#include "support.hpp"

using namespace kgsm;
using kgsm::testing::count_substr;
using kgsm::testing::xml_problem;

namespace {

csv::Table table(const std::vector<double>& k, const std::vector<double>& y) {
  csv::Table t;
  t.header = {"k", "y"};
  for (std::size_t i = 0; i < k.size(); ++i) {
    t.rows.push_back({csv::format_double(k[i]), csv::format_double(y[i])});
  }
  return t;
}

svg::SeriesSpec line(const std::string& label, const std::string& tbl) {
  svg::SeriesSpec s;
  s.label = label;
  s.table = tbl;
  s.y_column = "y";
  return s;
}

std::vector<double> polyline_ys(const std::string& doc) {
  std::vector<double> ys;
  const std::regex points("points=\"([^\"]*)\"");
  for (auto it = std::sregex_iterator(doc.begin(), doc.end(), points); it != std::sregex_iterator();
       ++it) {
    std::istringstream in((*it)[1].str());
    std::string pair;
    while (in >> pair) {
      ys.push_back(std::stod(pair.substr(pair.find(',') + 1)));
    }
  }
  return ys;
}

} // namespace

TEST_CASE("two-series log plot: well-formed, two polylines, two legend entries") {
  svg::Tables tables{{"a", table({0, 1, 2, 3}, {1.0, 0.1, 0.01, 0.001})},
                     {"b", table({0, 1, 2, 3}, {1.0, 0.5, 0.25, 0.125})}};
  svg::PlotSpec plot;
  plot.title = "errors & <rates>";
  plot.series = {line("first", "a"), line("second", "b")};
  svg::RenderStats stats;
  const std::string doc = svg::render_svg(plot, tables, &stats);
  CHECK(xml_problem(doc).empty());
  CHECK(count_substr(doc, "<polyline") == 2);
  CHECK(count_substr(doc, "class=\"legend-entry\"") == 2);
  CHECK(stats.polylines == 2);
  CHECK(stats.clipped == 0);
  CHECK(doc.find("errors &amp; &lt;rates&gt;") != std::string::npos);
  CHECK(doc.find("<!-- clipped: 0 -->") != std::string::npos);
  // Ticks sit at integer decades spanning the data.
  CHECK(stats.y_min == -3.0);
  CHECK(stats.y_max == 0.0);
  for (int d = -3; d <= 0; ++d) {
    CHECK(doc.find("data-decade=\"" + std::to_string(d) + "\"") != std::string::npos);
  }
  CHECK(doc.find("href") == std::string::npos);
}

TEST_CASE("constant series at 1 is a horizontal line on decade 0") {
  svg::Tables tables{{"c", table({0, 10, 20}, {1.0, 1.0, 1.0})}};
  svg::PlotSpec plot;
  plot.series = {line("one", "c")};
  const std::string doc = svg::render_svg(plot, tables);
  const auto ys = polyline_ys(doc);
  REQUIRE(ys.size() == 3);
  CHECK(ys[0] == ys[1]);
  CHECK(ys[1] == ys[2]);
  std::smatch m;
  const std::regex tick("y=\"([-0-9.]+)\" text-anchor=\"end\" data-decade=\"0\"");
  REQUIRE(std::regex_search(doc, m, tick));
  CHECK(std::abs(std::stod(m[1].str()) - 4.0 - ys[0]) < 0.02);
}

TEST_CASE("zeros are clipped and counted") {
  svg::Tables tables{{"z", table({0, 1, 2, 3}, {1.0, 0.0, 1e-3, 0.0})}};
  svg::PlotSpec plot;
  plot.series = {line("z", "z")};
  svg::RenderStats stats;
  const std::string doc = svg::render_svg(plot, tables, &stats);
  CHECK(stats.clipped == 2);
  CHECK(doc.find("<!-- clipped: 2 -->") != std::string::npos);
  CHECK(xml_problem(doc).empty());
  CHECK(stats.y_min <= std::log10(svg::kClipFloor));
}

TEST_CASE("negative values plot as magnitudes on a log axis") {
  svg::Tables tables{{"n", table({0, 1}, {-100.0, 0.01})}};
  svg::PlotSpec plot;
  plot.series = {line("n", "n")};
  svg::RenderStats stats;
  svg::render_svg(plot, tables, &stats);
  CHECK(stats.y_min == -2.0);
  CHECK(stats.y_max == 2.0);
}

TEST_CASE("pre-logged columns and linear axes") {
  svg::Tables tables{{"t", table({0, 1, 2}, {0.0, -400.0, -800.0})}};
  svg::PlotSpec plot;
  auto s = line("theory", "t");
  s.y_is_log10 = true;
  plot.series = {s};
  svg::RenderStats stats;
  svg::render_svg(plot, tables, &stats);
  CHECK(stats.y_min == -800.0);
  CHECK(stats.y_max == 0.0);
  CHECK(stats.clipped == 0);

  svg::PlotSpec lin;
  lin.y_scale = svg::YScale::Linear;
  lin.series = {line("lin", "t")};
  auto m = lin.series[0];
  m.style = svg::Style::Markers;
  lin.series.push_back(m);
  const std::string doc = svg::render_svg(lin, tables, &stats);
  CHECK(xml_problem(doc).empty());
  CHECK(stats.y_min <= -800.0);
  CHECK(stats.y_max >= 0.0);
  CHECK(count_substr(doc, "<polyline") == 1);
  CHECK(count_substr(doc, "<circle") == 3 + 1);
  CHECK(doc.find("data-decade") == std::string::npos);
  CHECK(doc.find("clipped") == std::string::npos);
}

TEST_CASE("decimation keeps extremes") {
  std::vector<double> k;
  std::vector<double> y;
  for (int i = 0; i < 100000; ++i) {
    k.push_back(i);
    y.push_back(i == 54321 ? 1e-30 : 1.0);
  }
  svg::Tables tables{{"s", table(k, y)}};
  svg::PlotSpec plot;
  plot.series = {line("spike", "s")};
  svg::RenderStats stats;
  const std::string doc = svg::render_svg(plot, tables, &stats);
  CHECK(stats.y_min <= -30.0);
  CHECK(polyline_ys(doc).size() <= plot.max_points + 4);
}

TEST_CASE("render errors") {
  svg::Tables tables{{"a", table({0, 1}, {1.0, 2.0})}};
  svg::PlotSpec plot;
  plot.series = {line("missing table", "nope")};
  CHECK_THROWS_AS(svg::render_svg(plot, tables), std::invalid_argument);
  auto bad_column = line("bad", "a");
  bad_column.y_column = "w";
  plot.series = {bad_column};
  CHECK_THROWS_AS(svg::render_svg(plot, tables), std::invalid_argument);
  tables["empty"] = table({}, {});
  plot.series = {line("empty", "empty")};
  CHECK_THROWS_AS(svg::render_svg(plot, tables), std::invalid_argument);
  plot.series.clear();
  CHECK_THROWS_AS(svg::render_svg(plot, tables), std::invalid_argument);
}

TEST_CASE("escape_xml") {
  CHECK(svg::escape_xml("a<b>&\"'") == "a&lt;b&gt;&amp;&quot;&apos;");
  CHECK(svg::escape_xml("plain") == "plain");
}
