#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "kgsm/csv.hpp"

namespace kgsm::svg {

enum class YScale { Linear, Log10 };

enum class Style { Line, Dashed, Markers };

/// One curve: column `y_column` of table `table` against `x_column`.
struct SeriesSpec {
  std::string label;
  std::string table;
  std::string y_column;
  std::string x_column = "k";
  std::string color = "#1f77b4";
  Style style = Style::Line;
  /// The column already holds log10 values (used for theory tails that
  /// underflow a double).
  bool y_is_log10 = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label = "iteration k";
  std::string y_label;
  YScale y_scale = YScale::Log10;
  std::vector<SeriesSpec> series;
  /// Points per series kept after decimation; each bucket keeps its
  /// extremes.
  std::size_t max_points = 4000;
};

/// Values below this are clipped before the log transform.
inline constexpr double kClipFloor = 1e-320;

struct RenderStats {
  std::size_t clipped = 0;
  std::size_t polylines = 0;
  double y_min = 0.0;  ///< axis range, in log10 units on a log scale
  double y_max = 0.0;
};

using Tables = std::map<std::string, csv::Table>;

/// Self-contained SVG text. Log plots take |y| first. Throws
/// std::invalid_argument for a missing table or column or when a series has
/// no finite points.
std::string render_svg(const PlotSpec& plot, const Tables& tables, RenderStats* stats = nullptr);

/// Escapes &, <, >, " and ' for XML text and attributes.
std::string escape_xml(const std::string& text);

} // namespace kgsm::svg
