#include "sustain/chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace sustain {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
constexpr int kMarginLeft = 72;
constexpr int kMarginRight = 18;
constexpr int kMarginTop = 42;
constexpr int kMarginBottom = 52;

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

// Largest "nice" step (1/2/5 x 10^k) giving at most max_ticks intervals.
double nice_step(double range, int max_ticks) {
    if (range <= 0.0) return 1.0;
    double rough = range / max_ticks;
    double mag = std::pow(10.0, std::floor(std::log10(rough)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (m * mag >= rough) return m * mag;
    }
    return 10.0 * mag;
}

struct Extent {
    double min = 0.0;
    double max = 1.0;
};

Extent axis_extent(double lo, double hi, bool pad) {
    if (lo > hi) std::swap(lo, hi);
    if (lo == hi) {
        lo -= 1.0;
        hi += 1.0;
    } else if (pad) {
        double p = (hi - lo) * 0.06;
        lo -= p;
        hi += p;
    }
    return {lo, hi};
}

}  // namespace

std::string render_svg(const Chart& chart) {
    if (chart.series.empty()) throw std::invalid_argument("chart has no series");
    for (const auto& s : chart.series)
        if (s.points.empty()) throw std::invalid_argument("chart series '" + s.name + "' is empty");

    double xmin = chart.series[0].points[0].first, xmax = xmin;
    double ymin = chart.series[0].points[0].second, ymax = ymin;
    for (const auto& s : chart.series) {
        for (const auto& [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (chart.kind == ChartKind::Bar) {
        ymin = std::min(ymin, 0.0);
        ymax = std::max(ymax, 0.0);
    }
    Extent xe = axis_extent(xmin, xmax, chart.kind == ChartKind::Line);
    Extent ye = axis_extent(ymin, ymax, true);
    if (chart.kind == ChartKind::Bar) {
        // keep a half-slot of room so bars do not touch the frame
        double slot = chart.series[0].points.size() > 1
                          ? (xmax - xmin) / static_cast<double>(chart.series[0].points.size() - 1)
                          : 1.0;
        xe = axis_extent(xmin - slot * 0.6, xmax + slot * 0.6, false);
    }

    const double plot_w = chart.width - kMarginLeft - kMarginRight;
    const double plot_h = chart.height - kMarginTop - kMarginBottom;
    auto px = [&](double x) {
        return kMarginLeft + (x - xe.min) / (xe.max - xe.min) * plot_w;
    };
    auto py = [&](double y) {
        return kMarginTop + plot_h - (y - ye.min) / (ye.max - ye.min) * plot_h;
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(chart.width) +
           "\" height=\"" + std::to_string(chart.height) + "\" viewBox=\"0 0 " +
           std::to_string(chart.width) + " " + std::to_string(chart.height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fmt(chart.width / 2.0) +
           "\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">" +
           xml_escape(chart.title) + "</text>\n";

    // gridlines and ticks
    double ystep = nice_step(ye.max - ye.min, 6);
    double ystart = std::ceil(ye.min / ystep) * ystep;
    for (double y = ystart; y <= ye.max + 1e-12 * ystep; y += ystep) {
        double yy = py(y);
        svg += "<line x1=\"" + fmt(kMarginLeft) + "\" y1=\"" + fmt(yy) + "\" x2=\"" +
               fmt(kMarginLeft + plot_w) + "\" y2=\"" + fmt(yy) +
               "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fmt(kMarginLeft - 6) + "\" y=\"" + fmt(yy + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" + fmt(y) +
               "</text>\n";
    }
    double xstep = nice_step(xe.max - xe.min, 8);
    double xstart = std::ceil(xe.min / xstep) * xstep;
    for (double x = xstart; x <= xe.max + 1e-12 * xstep; x += xstep) {
        double xx = px(x);
        svg += "<line x1=\"" + fmt(xx) + "\" y1=\"" + fmt(kMarginTop + plot_h) + "\" x2=\"" +
               fmt(xx) + "\" y2=\"" + fmt(kMarginTop + plot_h + 4) +
               "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fmt(xx) + "\" y=\"" + fmt(kMarginTop + plot_h + 18) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" + fmt(x) +
               "</text>\n";
    }

    // zero line when visible
    if (ye.min < 0.0 && ye.max > 0.0) {
        svg += "<line x1=\"" + fmt(kMarginLeft) + "\" y1=\"" + fmt(py(0.0)) + "\" x2=\"" +
               fmt(kMarginLeft + plot_w) + "\" y2=\"" + fmt(py(0.0)) +
               "\" stroke=\"#888888\" stroke-width=\"1\"/>\n";
    }

    // frame
    svg += "<rect x=\"" + fmt(kMarginLeft) + "\" y=\"" + fmt(kMarginTop) + "\" width=\"" +
           fmt(plot_w) + "\" height=\"" + fmt(plot_h) +
           "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";

    // data
    for (size_t si = 0; si < chart.series.size(); ++si) {
        const auto& s = chart.series[si];
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        if (chart.kind == ChartKind::Line) {
            std::string pts;
            for (const auto& [x, y] : s.points) {
                if (!pts.empty()) pts += " ";
                pts += fmt(px(x)) + "," + fmt(py(y));
            }
            svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
                   "\" stroke-width=\"2\"/>\n";
            for (const auto& [x, y] : s.points)
                svg += "<circle cx=\"" + fmt(px(x)) + "\" cy=\"" + fmt(py(y)) +
                       "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
        } else {
            double slot = s.points.size() > 1
                              ? plot_w / static_cast<double>(s.points.size() + 1)
                              : plot_w / 2.0;
            double width = slot * 0.6 / static_cast<double>(chart.series.size());
            for (const auto& [x, y] : s.points) {
                double x0 = px(x) - slot * 0.3 + width * static_cast<double>(si);
                double y0 = std::min(py(0.0), py(y));
                double h = std::abs(py(y) - py(0.0));
                svg += "<rect x=\"" + fmt(x0) + "\" y=\"" + fmt(y0) + "\" width=\"" + fmt(width) +
                       "\" height=\"" + fmt(h) + "\" fill=\"" + color + "\"/>\n";
            }
        }
    }

    // legend
    double lx = kMarginLeft + 10;
    double ly = kMarginTop + 12;
    for (size_t si = 0; si < chart.series.size(); ++si) {
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        svg += "<rect x=\"" + fmt(lx) + "\" y=\"" + fmt(ly - 9) +
               "\" width=\"10\" height=\"10\" fill=\"" + std::string(color) + "\"/>\n";
        svg += "<text x=\"" + fmt(lx + 14) + "\" y=\"" + fmt(ly) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" +
               xml_escape(chart.series[si].name) + "</text>\n";
        ly += 15;
    }

    // axis labels
    svg += "<text x=\"" + fmt(kMarginLeft + plot_w / 2.0) + "\" y=\"" +
           fmt(chart.height - 12) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
           xml_escape(chart.x_label) + "</text>\n";
    svg += "<text x=\"16\" y=\"" + fmt(kMarginTop + plot_h / 2.0) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           fmt(kMarginTop + plot_h / 2.0) + ")\">" + xml_escape(chart.y_label) + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

}  // namespace sustain
