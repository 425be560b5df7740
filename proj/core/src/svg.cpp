#include "nexus/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace nexus {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string text(double x, double y, const std::string& s, int size = 11,
                 const std::string& anchor = "start", double rotate = 0.0) {
    std::string out = "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" +
                      std::to_string(size) + "\" font-family=\"sans-serif\" text-anchor=\"" +
                      anchor + "\"";
    if (rotate != 0.0) {
        out += " transform=\"rotate(" + num(rotate) + " " + num(x) + " " + num(y) + ")\"";
    }
    out += ">" + escape(s) + "</text>\n";
    return out;
}

} // namespace

std::string heat_color(double value, double lo, double hi) {
    double t = hi > lo ? (value - lo) / (hi - lo) : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    // Light blue (#f2f8fd) to dark blue (#08306b), componentwise linear so
    // the shade is monotone in the value.
    int r = static_cast<int>(std::lround(242.0 + t * (8.0 - 242.0)));
    int g = static_cast<int>(std::lround(248.0 + t * (48.0 - 248.0)));
    int b = static_cast<int>(std::lround(253.0 + t * (107.0 - 253.0)));
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

std::string periodogram_svg(const Periodogram& pg, const std::string& title,
                            const std::vector<int>& marked_periods) {
    const double width = 640.0;
    const double height = 360.0;
    const double ml = 70.0, mr = 20.0, mt = 40.0, mb = 50.0;
    const double pw = width - ml - mr;
    const double ph = height - mt - mb;

    double max_power = 0.0;
    double max_period = 0.0;
    for (std::size_t i = 0; i < pg.power.size(); ++i) {
        max_power = std::max(max_power, pg.power[i]);
        max_period = std::max(max_period, 1.0 / pg.frequencies[i]);
    }
    if (max_power <= 0.0) max_power = 1.0;

    auto px = [&](double period) { return ml + pw * period / max_period; };
    auto py = [&](double power) { return mt + ph * (1.0 - power / max_power); };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
                      num(width) + "\" height=\"" + num(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += text(width / 2.0, 22.0, title, 14, "middle");

    // axes
    svg += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt + ph) + "\" x2=\"" + num(ml + pw) +
           "\" y2=\"" + num(mt + ph) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt) + "\" x2=\"" + num(ml) + "\" y2=\"" +
           num(mt + ph) + "\" stroke=\"black\"/>\n";
    svg += text(ml + pw / 2.0, height - 12.0, "period (months)", 12, "middle");
    svg += text(16.0, mt + ph / 2.0, "power", 12, "middle", -90.0);

    for (int period : marked_periods) {
        double x = px(static_cast<double>(period));
        svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(mt) + "\" x2=\"" + num(x) + "\" y2=\"" +
               num(mt + ph) + "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
        svg += text(x, mt + ph + 16.0, std::to_string(period), 11, "middle");
    }

    // longest period first so the polyline runs left to right
    std::string points;
    for (std::size_t i = pg.power.size(); i > 0; --i) {
        double period = 1.0 / pg.frequencies[i - 1];
        points += num(px(period)) + "," + num(py(pg.power[i - 1])) + " ";
    }
    svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"" + points +
           "\"/>\n";
    svg += "</svg>\n";
    return svg;
}

std::string heatmap_svg(const Matrix& values, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels, const std::string& title) {
    const double cell = 42.0;
    const double ml = 170.0, mt = 60.0, mb = 90.0, mr = 30.0;
    const double width = ml + cell * static_cast<double>(values.cols()) + mr;
    const double height = mt + cell * static_cast<double>(values.rows()) + mb;

    double lo = 0.0;
    double hi = 0.0;
    bool first = true;
    for (std::size_t i = 0; i < values.rows(); ++i) {
        for (std::size_t j = 0; j < values.cols(); ++j) {
            double v = values(i, j);
            if (first || v < lo) lo = v;
            if (first || v > hi) hi = v;
            first = false;
        }
    }

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
                      num(width) + "\" height=\"" + num(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += text(width / 2.0, 26.0, title, 14, "middle");

    for (std::size_t i = 0; i < values.rows(); ++i) {
        for (std::size_t j = 0; j < values.cols(); ++j) {
            double x = ml + cell * static_cast<double>(j);
            double y = mt + cell * static_cast<double>(i);
            svg += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(cell) +
                   "\" height=\"" + num(cell) + "\" fill=\"" +
                   heat_color(values(i, j), lo, hi) + "\" stroke=\"#cccccc\"/>\n";
        }
    }
    for (std::size_t i = 0; i < row_labels.size(); ++i) {
        svg += text(ml - 8.0, mt + cell * (static_cast<double>(i) + 0.5) + 4.0, row_labels[i],
                    11, "end");
    }
    for (std::size_t j = 0; j < col_labels.size(); ++j) {
        double x = ml + cell * (static_cast<double>(j) + 0.5);
        svg += text(x, mt + cell * static_cast<double>(row_labels.size()) + 14.0, col_labels[j],
                    11, "end", -45.0);
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace nexus
