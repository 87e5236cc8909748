#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tailhedge {

struct SvgSeries {
    std::string label;
    std::vector<double> ys;
};

// Standalone SVG line chart: series share the x grid 0..n-1, with x tick
// labels sampled from x_labels (dates, usually). Deterministic output.
[[nodiscard]] std::string line_chart_svg(std::string_view title,
                                         std::span<const std::string> x_labels,
                                         std::span<const SvgSeries> series, int width = 960,
                                         int height = 520);

// Grouped-bar histogram over shared bin edges; each series supplies one bar
// per bin.
[[nodiscard]] std::string histogram_svg(std::string_view title, std::span<const double> edges,
                                        std::span<const SvgSeries> series, int width = 960,
                                        int height = 520);

}  // namespace tailhedge
