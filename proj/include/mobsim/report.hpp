#pragma once

// Static SVG line charts for accuracy-vs-attack-size results. Output is
// plain text SVG, deterministic byte-for-byte for identical inputs.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mobsim/csv.hpp"

namespace mobsim {

struct ChartSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;  // (x, y), x ascending
};

namespace detail {

inline std::string svg_num(double v) { return csv::format_double(v, 2); }

}  // namespace detail

// A fixed-size line chart with y fixed to [0, 1] (accuracy scale).
inline void write_svg_chart(const std::string& path, const std::string& title,
                            const std::string& x_label, const std::string& y_label,
                            const std::vector<ChartSeries>& series) {
    const double width = 860.0, height = 520.0;
    const double left = 80.0, right = width - 200.0, top = 60.0, bottom = height - 70.0;

    double x_min = 0.0, x_max = 1.0;
    bool any = false;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            if (!any) {
                x_min = x_max = x;
                any = true;
            }
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
        }
    if (!(x_max > x_min)) x_max = x_min + 1.0;

    const auto sx = [&](double x) {
        return left + (x - x_min) / (x_max - x_min) * (right - left);
    };
    const auto sy = [&](double y) { return bottom - y * (bottom - top); };

    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b"};
    const std::size_t n_colors = sizeof(palette) / sizeof(palette[0]);

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"860\" height=\"520\" "
           "viewBox=\"0 0 860 520\">\n";
    svg += "<rect width=\"860\" height=\"520\" fill=\"white\"/>\n";
    svg += "<text x=\"430\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"18\">" + title + "</text>\n";

    // Frame and gridlines.
    svg += "<rect x=\"" + detail::svg_num(left) + "\" y=\"" + detail::svg_num(top) +
           "\" width=\"" + detail::svg_num(right - left) + "\" height=\"" +
           detail::svg_num(bottom - top) + "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double y = static_cast<double>(i) / 5.0;
        const double py = sy(y);
        svg += "<line x1=\"" + detail::svg_num(left) + "\" y1=\"" + detail::svg_num(py) +
               "\" x2=\"" + detail::svg_num(right) + "\" y2=\"" + detail::svg_num(py) +
               "\" stroke=\"#ddd\"/>\n";
        svg += "<text x=\"" + detail::svg_num(left - 8) + "\" y=\"" +
               detail::svg_num(py + 4) + "\" text-anchor=\"end\" "
               "font-family=\"sans-serif\" font-size=\"12\">" +
               csv::format_double(y, 1) + "</text>\n";
    }

    // X ticks at every distinct point x.
    std::vector<double> xs;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) xs.push_back(x);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (const double x : xs) {
        const double px = sx(x);
        svg += "<line x1=\"" + detail::svg_num(px) + "\" y1=\"" + detail::svg_num(bottom) +
               "\" x2=\"" + detail::svg_num(px) + "\" y2=\"" +
               detail::svg_num(bottom + 5) + "\" stroke=\"#333\"/>\n";
        svg += "<text x=\"" + detail::svg_num(px) + "\" y=\"" +
               detail::svg_num(bottom + 20) + "\" text-anchor=\"middle\" "
               "font-family=\"sans-serif\" font-size=\"12\">" +
               csv::format_double(x, 0) + "</text>\n";
    }

    svg += "<text x=\"" + detail::svg_num((left + right) / 2.0) + "\" y=\"" +
           detail::svg_num(height - 20) + "\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"14\">" + x_label + "</text>\n";
    svg += "<text x=\"22\" y=\"" + detail::svg_num((top + bottom) / 2.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
           "transform=\"rotate(-90 22 " + detail::svg_num((top + bottom) / 2.0) +
           ")\">" + y_label + "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = palette[s % n_colors];
        std::string poly;
        for (const auto& [x, y] : series[s].points) {
            poly += detail::svg_num(sx(x));
            poly += ',';
            poly += detail::svg_num(sy(y));
            poly += ' ';
        }
        if (!poly.empty()) poly.pop_back();
        svg += "<polyline points=\"" + poly + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        for (const auto& [x, y] : series[s].points)
            svg += "<circle cx=\"" + detail::svg_num(sx(x)) + "\" cy=\"" +
                   detail::svg_num(sy(y)) + "\" r=\"3.5\" fill=\"" + color + "\"/>\n";
        const double ly = top + 10.0 + 22.0 * static_cast<double>(s);
        svg += "<line x1=\"" + detail::svg_num(right + 12) + "\" y1=\"" +
               detail::svg_num(ly) + "\" x2=\"" + detail::svg_num(right + 36) +
               "\" y2=\"" + detail::svg_num(ly) + "\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + detail::svg_num(right + 42) + "\" y=\"" +
               detail::svg_num(ly + 4) + "\" font-family=\"sans-serif\" "
               "font-size=\"12\">" + series[s].name + "</text>\n";
    }
    svg += "</svg>\n";
    csv::write_text(path, svg);
}

}  // namespace mobsim
