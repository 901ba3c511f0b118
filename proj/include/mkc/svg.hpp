#pragma once

#include <string>
#include <vector>

namespace mkc {

struct SvgSeries {
    std::vector<double> xs;
    std::vector<double> ys;
    std::string label;
    std::string color = "#1f77b4";
};

struct SvgBars {
    std::vector<double> edges;    // size = heights.size() + 1
    std::vector<double> heights;  // density scale
    std::string color = "#c8c8c8";
};

// Minimal single-panel line chart with axes and a legend. The output is
// well-formed standalone XML.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<SvgSeries>& series);

// Histogram (as bars) with density curves overlaid.
void write_histogram_chart(const std::string& path, const std::string& title,
                           const std::string& x_label, const std::string& y_label,
                           const SvgBars& bars, const std::vector<SvgSeries>& curves);

}  // namespace mkc
