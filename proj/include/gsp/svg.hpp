#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsp/csv.hpp"

namespace gsp {

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Minimal polyline-and-axes SVG plot. CSV output is the authoritative
/// artifact; this is a quick visual aid with optional log10 y scaling.
inline void write_svg_plot(const std::string& path, const std::string& title,
                           const std::vector<PlotSeries>& series, bool log_y = false) {
    const double width = 640, height = 420;
    const double ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double yv = s.y[i];
            if (log_y) {
                if (!(yv > 0.0)) continue;
                yv = std::log10(yv);
            }
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, yv);
            ymax = std::max(ymax, yv);
        }
    if (xmin > xmax) throw std::invalid_argument("write_svg_plot: no plottable points");
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto py = [&](double y) {
        if (log_y) y = std::log10(y);
        return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb);
    };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "' font-family='sans-serif' font-size='12'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << width / 2 << "' y='22' text-anchor='middle' font-size='15'>" << title
        << "</text>\n";
    out << "<line x1='" << ml << "' y1='" << height - mb << "' x2='" << width - mr << "' y2='"
        << height - mb << "' stroke='black'/>\n";
    out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << height - mb
        << "' stroke='black'/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double fx = xmin + (xmax - xmin) * t / 4.0;
        const double fy = ymin + (ymax - ymin) * t / 4.0;
        out << "<text x='" << px(fx) << "' y='" << height - mb + 18
            << "' text-anchor='middle'>" << format_double(std::round(fx * 1000) / 1000) << "</text>\n";
        const double label = log_y ? std::pow(10.0, fy) : fy;
        out << "<text x='" << ml - 8 << "' y='" << height - mb - (height - mt - mb) * t / 4.0 + 4
            << "' text-anchor='end'>" << format_double(std::round(label * 10000) / 10000)
            << "</text>\n";
    }
    int ci = 0;
    for (const auto& s : series) {
        const char* color = palette[ci % 6];
        out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (log_y && !(s.y[i] > 0.0)) continue;
            out << px(s.x[i]) << "," << py(s.y[i]) << " ";
        }
        out << "'/>\n";
        out << "<text x='" << width - mr - 150 << "' y='" << mt + 16 * ci << "' fill='" << color
            << "'>" << s.name << "</text>\n";
        ++ci;
    }
    out << "</svg>\n";
}

} // namespace gsp
