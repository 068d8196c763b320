#pragma once

/// \file
/// Minimal SVG 1.1 line and scatter charts for characteristic curves.
/// Output bytes depend only on the inputs.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pvsdm {

enum class PlotKind { iv, pv, error };
enum class SeriesStyle { markers, line };

std::string_view to_string(PlotKind kind);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  SeriesStyle style = SeriesStyle::line;
};

/// Throws DataError on an empty series list, a series with no points,
/// mismatched x/y lengths or non-finite values.
std::string render_plot_svg(const std::vector<PlotSeries>& series, PlotKind kind,
                            std::string_view title = {});

void render_plot(const std::vector<PlotSeries>& series, PlotKind kind,
                 const std::filesystem::path& path, std::string_view title = {});

}  // namespace pvsdm
