#include "pvsdm/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iterator>
#include <limits>

#include <fmt/format.h>

#include "pvsdm/error.hpp"
#include "pvsdm/io.hpp"

namespace pvsdm {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 24.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 56.0;

constexpr std::array<std::string_view, 8> kPalette{
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Smallest 1-2-5 step giving at most `max_ticks` intervals over the span.
double nice_step(double span, int max_ticks) {
  const double raw = span / max_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

Range padded(double lo, double hi) {
  if (hi == lo) {
    const double pad = lo == 0.0 ? 1.0 : 0.1 * std::abs(lo);
    return {lo - pad, hi + pad};
  }
  return {lo, hi};
}

std::string tick_label(double v, double step) {
  if (std::abs(v) < 1e-12 * step) v = 0.0;
  const int decimals = std::max(0, -static_cast<int>(std::floor(std::log10(step) + 1e-9)));
  if (step < 1e-3 || std::abs(v) >= 1e5) return fmt::format("{:.2g}", v);
  return fmt::format("{:.{}f}", v, decimals);
}

void check(const std::vector<PlotSeries>& series) {
  if (series.empty()) throw DataError("plot: no series to draw");
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) {
      throw DataError("plot: series '" + s.label + "' has mismatched x and y lengths");
    }
    if (s.x.empty()) throw DataError("plot: series '" + s.label + "' has no points");
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(s.x.begin(), s.x.end(), finite) ||
        !std::all_of(s.y.begin(), s.y.end(), finite)) {
      throw DataError("plot: series '" + s.label + "' contains non-finite values");
    }
  }
}

}  // namespace

std::string_view to_string(PlotKind kind) {
  switch (kind) {
    case PlotKind::iv: return "iv";
    case PlotKind::pv: return "pv";
    case PlotKind::error: return "error";
  }
  return "iv";
}

std::string render_plot_svg(const std::vector<PlotSeries>& series, PlotKind kind,
                            std::string_view title) {
  check(series);

  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  for (const auto& s : series) {
    const auto [x0, x1] = std::minmax_element(s.x.begin(), s.x.end());
    const auto [y0, y1] = std::minmax_element(s.y.begin(), s.y.end());
    xmin = std::min(xmin, *x0);
    xmax = std::max(xmax, *x1);
    ymin = std::min(ymin, *y0);
    ymax = std::max(ymax, *y1);
  }
  if (kind != PlotKind::iv || ymin > 0.0) ymin = std::min(ymin, 0.0);
  const Range xr = padded(xmin, xmax);
  const Range yr = padded(ymin, ymax);
  const double xstep = nice_step(xr.hi - xr.lo, 8);
  const double ystep = nice_step(yr.hi - yr.lo, 6);
  const Range xa{std::floor(xr.lo / xstep) * xstep, std::ceil(xr.hi / xstep) * xstep};
  const Range ya{std::floor(yr.lo / ystep) * ystep, std::ceil(yr.hi / ystep) * ystep};

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xa.lo) / (xa.hi - xa.lo) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - ya.lo) / (ya.hi - ya.lo) * ph; };

  const char* ylabel = kind == PlotKind::iv   ? "Current (A)"
                       : kind == PlotKind::pv ? "Power (W)"
                                              : "Absolute error (A)";

  std::string out;
  auto it = std::back_inserter(out);
  fmt::format_to(it,
                 "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                 "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" "
                 "height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
                 "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
                 kWidth, kHeight);
  if (!title.empty()) {
    fmt::format_to(it,
                   "<text x=\"{:.2f}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" "
                   "text-anchor=\"middle\">{}</text>\n",
                   kLeft + pw / 2, escape(title));
  }

  out += "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  const int nx = static_cast<int>(std::lround((xa.hi - xa.lo) / xstep));
  const int ny = static_cast<int>(std::lround((ya.hi - ya.lo) / ystep));
  for (int k = 0; k <= nx; ++k) {
    const double x = px(xa.lo + k * xstep);
    fmt::format_to(it, "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\"/>\n", x,
                   kTop, kTop + ph);
  }
  for (int k = 0; k <= ny; ++k) {
    const double y = py(ya.lo + k * ystep);
    fmt::format_to(it, "<line x1=\"{1:.2f}\" y1=\"{0:.2f}\" x2=\"{2:.2f}\" y2=\"{0:.2f}\"/>\n", y,
                   kLeft, kLeft + pw);
  }
  out += "</g>\n";
  fmt::format_to(it,
                 "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
                 "fill=\"none\" stroke=\"black\"/>\n",
                 kLeft, kTop, pw, ph);

  out += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int k = 0; k <= nx; ++k) {
    const double v = xa.lo + k * xstep;
    fmt::format_to(it, "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", px(v),
                   kTop + ph + 16, tick_label(v, xstep));
  }
  for (int k = 0; k <= ny; ++k) {
    const double v = ya.lo + k * ystep;
    fmt::format_to(it, "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", kLeft - 6,
                   py(v) + 4, tick_label(v, ystep));
  }
  out += "</g>\n";
  fmt::format_to(it,
                 "<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"13\" "
                 "text-anchor=\"middle\">Voltage (V)</text>\n",
                 kLeft + pw / 2, kHeight - 14);
  fmt::format_to(it,
                 "<text x=\"18\" y=\"{0:.2f}\" font-family=\"sans-serif\" font-size=\"13\" "
                 "text-anchor=\"middle\" transform=\"rotate(-90 18 {0:.2f})\">{1}</text>\n",
                 kTop + ph / 2, ylabel);

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const auto color = kPalette[k % kPalette.size()];
    if (s.style == SeriesStyle::line && s.x.size() > 1) {
      fmt::format_to(it, "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"",
                     color);
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        fmt::format_to(it, "{}{:.2f},{:.2f}", i ? " " : "", px(s.x[i]), py(s.y[i]));
      }
      out += "\"/>\n";
    } else {
      fmt::format_to(it, "<g fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\">\n", color);
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        fmt::format_to(it, "<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3.5\"/>\n", px(s.x[i]),
                       py(s.y[i]));
      }
      out += "</g>\n";
    }
  }

  const double lx = kLeft + pw - 190;
  const double ly = kTop + 10;
  fmt::format_to(it,
                 "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"180\" height=\"{:.2f}\" fill=\"white\" "
                 "stroke=\"#999999\"/>\n",
                 lx, ly, 10.0 + 18.0 * static_cast<double>(series.size()));
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const auto color = kPalette[k % kPalette.size()];
    const double y = ly + 18.0 + 18.0 * static_cast<double>(k);
    if (s.style == SeriesStyle::line && s.x.size() > 1) {
      fmt::format_to(it,
                     "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" "
                     "stroke-width=\"1.5\"/>\n",
                     lx + 8, y - 4, lx + 32, y - 4, color);
    } else {
      fmt::format_to(it,
                     "<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3.5\" fill=\"none\" stroke=\"{}\"/>\n",
                     lx + 20, y - 4, color);
    }
    fmt::format_to(it,
                   "<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" "
                   "font-size=\"11\">{}</text>\n",
                   lx + 40, y, escape(s.label));
  }
  out += "</svg>\n";
  return out;
}

void render_plot(const std::vector<PlotSeries>& series, PlotKind kind,
                 const std::filesystem::path& path, std::string_view title) {
  write_text_file(path, render_plot_svg(series, kind, title));
}

}  // namespace pvsdm
