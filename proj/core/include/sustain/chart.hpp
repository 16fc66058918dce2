#pragma once

#include <string>
#include <utility>
#include <vector>

namespace sustain {

struct ChartSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;  // (x, y)
};

enum class ChartKind { Line, Bar };

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    ChartKind kind = ChartKind::Line;
    std::vector<ChartSeries> series;
    int width = 720;
    int height = 440;
};

/// Self-contained deterministic SVG: same chart, same bytes.
std::string render_svg(const Chart& chart);

}  // namespace sustain
