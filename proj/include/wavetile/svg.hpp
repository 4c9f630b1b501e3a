#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "wavetile/verify.hpp"

namespace wavetile {

// Minimal static SVG scatter plot of report ratios against one parameter.
inline std::string svg_scatter(const std::vector<ConstantReport>& reports,
                               double ConstantReport::* axis, const std::string& title) {
    std::vector<std::pair<double, double>> pts;
    for (const ConstantReport& r : reports) {
        const double x = r.*axis;
        if (std::isnan(x) || r.degenerate || r.ratio <= 0.0) continue;
        pts.push_back({std::log2(x > 0 ? x : 1e-300), std::log2(r.ratio)});
    }
    const int W = 640, H = 420, M = 48;
    std::string out;
    out += "<svg xmlns='http://www.w3.org/2000/svg' width='" + std::to_string(W) + "' height='" +
           std::to_string(H) + "'>\n";
    out += "<rect width='100%' height='100%' fill='white'/>\n";
    out += "<text x='12' y='20' font-family='monospace' font-size='13'>" + title + "</text>\n";
    if (!pts.empty()) {
        double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
        for (auto& [x, y] : pts) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
        if (xmax == xmin) xmax = xmin + 1;
        if (ymax == ymin) ymax = ymin + 1;
        auto px = [&](double x) { return M + (x - xmin) / (xmax - xmin) * (W - 2 * M); };
        auto py = [&](double y) { return H - M - (y - ymin) / (ymax - ymin) * (H - 2 * M); };
        out += "<line x1='" + std::to_string(M) + "' y1='" + std::to_string(H - M) + "' x2='" +
               std::to_string(W - M) + "' y2='" + std::to_string(H - M) +
               "' stroke='black'/>\n";
        out += "<line x1='" + std::to_string(M) + "' y1='" + std::to_string(M) + "' x2='" +
               std::to_string(M) + "' y2='" + std::to_string(H - M) + "' stroke='black'/>\n";
        for (auto& [x, y] : pts)
            out += "<circle cx='" + std::to_string(px(x)) + "' cy='" + std::to_string(py(y)) +
                   "' r='2.5' fill='steelblue' fill-opacity='0.7'/>\n";
        char label[128];
        std::snprintf(label, sizeof label, "log2 axis: x in [%.2f, %.2f], log2 ratio in [%.2f, %.2f]",
                      xmin, xmax, ymin, ymax);
        out += std::string("<text x='12' y='") + std::to_string(H - 12) +
               "' font-family='monospace' font-size='11'>" + label + "</text>\n";
    } else {
        out += "<text x='12' y='40' font-family='monospace' font-size='12'>no data</text>\n";
    }
    out += "</svg>\n";
    return out;
}

inline void write_report_plots(const std::vector<ConstantReport>& reports,
                               const std::string& dir) {
    struct Plot {
        const char* name;
        double ConstantReport::* axis;
    };
    const Plot plots[] = {{"ratio_vs_delta.svg", &ConstantReport::delta},
                          {"ratio_vs_sigma.svg", &ConstantReport::sigma},
                          {"ratio_vs_k.svg", &ConstantReport::k},
                          {"ratio_vs_j.svg", &ConstantReport::j}};
    for (const Plot& p : plots) {
        std::ofstream out(dir + "/" + p.name);
        out << svg_scatter(reports, p.axis, std::string("measured ratios against ") + p.name);
    }
}

} // namespace wavetile
