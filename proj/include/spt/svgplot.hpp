#pragma once

#include <string>
#include <vector>

namespace spt {

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
};

// Static SVG line plot with axes, ticks and a legend. Throws (writing
// nothing) when no series or only empty series are given.
void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel,
                     const std::vector<PlotSeries>& series);

}  // namespace spt
