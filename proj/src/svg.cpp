#include "kgsm/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace kgsm::svg {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 180.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

struct Point {
  double x;
  double y;
};

std::string fmt(double v, int precision = 2) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, precision);
  return std::string(buf, res.ptr);
}

std::string tick_label(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 6);
  return std::string(buf, res.ptr);
}

// Keeps the first, smallest, largest and last point of each bucket, in order.
std::vector<Point> decimate(const std::vector<Point>& pts, std::size_t max_points) {
  if (pts.size() <= max_points || max_points < 8) {
    return pts;
  }
  const std::size_t buckets = max_points / 4;
  const double width = static_cast<double>(pts.size()) / static_cast<double>(buckets);
  std::vector<Point> out;
  out.reserve(buckets * 4);
  for (std::size_t b = 0; b < buckets; ++b) {
    const auto lo = static_cast<std::size_t>(std::floor(b * width));
    const auto hi = std::min(pts.size(), static_cast<std::size_t>(std::floor((b + 1) * width)));
    if (lo >= hi) {
      continue;
    }
    std::size_t imin = lo;
    std::size_t imax = lo;
    for (std::size_t i = lo; i < hi; ++i) {
      if (pts[i].y < pts[imin].y) {
        imin = i;
      }
      if (pts[i].y > pts[imax].y) {
        imax = i;
      }
    }
    std::vector<std::size_t> keep{lo, imin, imax, hi - 1};
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    for (std::size_t i : keep) {
      out.push_back(pts[i]);
    }
  }
  return out;
}

double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double step = norm < 1.5 ? 1.0 : norm < 3.0 ? 2.0 : norm < 7.0 ? 5.0 : 10.0;
  return step * mag;
}

std::vector<double> linear_ticks(double lo, double hi) {
  const double step = nice_step(hi - lo, 6);
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) {
    ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return ticks;
}

} // namespace

std::string escape_xml(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
    case '&':
      out += "&amp;";
      break;
    case '<':
      out += "&lt;";
      break;
    case '>':
      out += "&gt;";
      break;
    case '"':
      out += "&quot;";
      break;
    case '\'':
      out += "&apos;";
      break;
    default:
      out += c;
    }
  }
  return out;
}

std::string render_svg(const PlotSpec& plot, const Tables& tables, RenderStats* stats) {
  if (plot.series.empty()) {
    throw std::invalid_argument("render_svg: no series");
  }
  const bool log_scale = plot.y_scale == YScale::Log10;
  RenderStats local;
  std::vector<std::vector<Point>> curves;
  for (const SeriesSpec& s : plot.series) {
    const auto it = tables.find(s.table);
    if (it == tables.end()) {
      throw std::invalid_argument("render_svg: unknown table '" + s.table + "'");
    }
    std::vector<double> xs;
    std::vector<double> ys;
    try {
      xs = it->second.numeric_column(s.x_column);
      ys = it->second.numeric_column(s.y_column);
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("render_svg: table '" + s.table + "' lacks column '" +
                                  s.y_column + "' or '" + s.x_column + "'");
    }
    std::vector<Point> pts;
    pts.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double y = ys[i];
      if (log_scale && !s.y_is_log10) {
        y = std::abs(y);
        if (y < kClipFloor) {
          y = kClipFloor;
          ++local.clipped;
        }
        y = std::log10(y);
      }
      if (std::isfinite(xs[i]) && std::isfinite(y)) {
        pts.push_back({xs[i], y});
      }
    }
    if (pts.empty()) {
      throw std::invalid_argument("render_svg: series '" + s.label + "' has no finite points");
    }
    curves.push_back(decimate(pts, plot.max_points));
  }

  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = x_lo;
  double y_hi = -x_lo;
  for (const auto& c : curves) {
    for (const Point& p : c) {
      x_lo = std::min(x_lo, p.x);
      x_hi = std::max(x_hi, p.x);
      y_lo = std::min(y_lo, p.y);
      y_hi = std::max(y_hi, p.y);
    }
  }
  if (x_hi == x_lo) {
    x_hi = x_lo + 1.0;
  }
  std::vector<double> y_ticks;
  if (log_scale) {
    y_lo = std::floor(y_lo);
    y_hi = std::ceil(y_hi);
    if (y_hi == y_lo) {
      y_lo -= 1.0;
      y_hi += 1.0;
    }
    const int decades = static_cast<int>(y_hi - y_lo);
    const int every = std::max(1, (decades + 11) / 12);
    for (int d = static_cast<int>(y_lo); d <= static_cast<int>(y_hi); ++d) {
      if ((d - static_cast<int>(y_lo)) % every == 0) {
        y_ticks.push_back(d);
      }
    }
  } else {
    if (y_hi == y_lo) {
      y_lo -= 1.0;
      y_hi += 1.0;
    }
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;
    y_ticks = linear_ticks(y_lo, y_hi);
  }
  local.y_min = y_lo;
  local.y_max = y_hi;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * plot_h; };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  if (log_scale) {
    out << "<!-- clipped: " << local.clipped << " -->\n";
  }
  out << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << fmt(kLeft + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << escape_xml(plot.title) << "</text>\n";

  out << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
  out << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\"" << fmt(plot_w)
      << "\" height=\"" << fmt(plot_h) << "\"/>\n";
  out << "</g>\n";

  out << "<g class=\"y-ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double t : y_ticks) {
    const double y = py(t);
    out << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(kLeft)
        << "\" y2=\"" << fmt(y) << "\" stroke=\"black\"/>";
    out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(kLeft + plot_w)
        << "\" y2=\"" << fmt(y) << "\" stroke=\"#dddddd\"/>";
    out << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\"";
    if (log_scale) {
      out << " data-decade=\"" << static_cast<int>(t) << "\">1e" << static_cast<int>(t);
    } else {
      out << ">" << tick_label(t);
    }
    out << "</text>\n";
  }
  out << "</g>\n";

  out << "<g class=\"x-ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double t : linear_ticks(x_lo, x_hi)) {
    const double x = px(t);
    out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(kTop + plot_h) << "\" x2=\"" << fmt(x)
        << "\" y2=\"" << fmt(kTop + plot_h + 5) << "\" stroke=\"black\"/>";
    out << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(kTop + plot_h + 18)
        << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  out << "</g>\n";

  out << "<text x=\"" << fmt(kLeft + plot_w / 2) << "\" y=\"" << fmt(kHeight - 15)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << escape_xml(plot.x_label) << "</text>\n";
  out << "<text transform=\"translate(18 " << fmt(kTop + plot_h / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << escape_xml(plot.y_label) << "</text>\n";

  out << "<g class=\"series\" fill=\"none\" stroke-width=\"1.2\">\n";
  for (std::size_t s = 0; s < curves.size(); ++s) {
    const SeriesSpec& spec = plot.series[s];
    if (spec.style == Style::Markers) {
      out << "<g fill=\"" << escape_xml(spec.color) << "\">";
      for (const Point& p : curves[s]) {
        out << "<circle cx=\"" << fmt(px(p.x)) << "\" cy=\"" << fmt(py(p.y)) << "\" r=\"4\"/>";
      }
      out << "</g>\n";
      continue;
    }
    out << "<polyline stroke=\"" << escape_xml(spec.color) << '"';
    if (spec.style == Style::Dashed) {
      out << " stroke-dasharray=\"6 4\"";
    }
    out << " points=\"";
    for (std::size_t i = 0; i < curves[s].size(); ++i) {
      if (i > 0) {
        out << ' ';
      }
      out << fmt(px(curves[s][i].x)) << ',' << fmt(py(curves[s][i].y));
    }
    out << "\"/>\n";
    ++local.polylines;
  }
  out << "</g>\n";

  out << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  const double lx = kLeft + plot_w + 12;
  for (std::size_t s = 0; s < plot.series.size(); ++s) {
    const SeriesSpec& spec = plot.series[s];
    const double ly = kTop + 12 + 20.0 * static_cast<double>(s);
    out << "<g class=\"legend-entry\">";
    if (spec.style == Style::Markers) {
      out << "<circle cx=\"" << fmt(lx + 10) << "\" cy=\"" << fmt(ly) << "\" r=\"4\" fill=\""
          << escape_xml(spec.color) << "\"/>";
    } else {
      out << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(lx + 20)
          << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << escape_xml(spec.color)
          << "\" stroke-width=\"2\"" << (spec.style == Style::Dashed ? " stroke-dasharray=\"6 4\"" : "")
          << "/>";
    }
    out << "<text x=\"" << fmt(lx + 26) << "\" y=\"" << fmt(ly + 4) << "\">" << escape_xml(spec.label)
        << "</text></g>\n";
  }
  out << "</g>\n";
  out << "</svg>\n";

  if (stats != nullptr) {
    *stats = local;
  }
  return out.str();
}

} // namespace kgsm::svg
