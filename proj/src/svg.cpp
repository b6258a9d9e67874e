#include "dlm/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <string>

#include "dlm/error.hpp"

namespace dlm {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

}  // namespace

std::string scatter_svg(std::span<const double> x, std::span<const double> y, std::span<const std::string> point_labels,
                        const ScatterSpec& spec) {
    if (x.size() != y.size()) throw data_error("scatter: x and y differ in length");
    if (!point_labels.empty() && point_labels.size() != x.size()) throw data_error("scatter: label count mismatch");
    constexpr double width = 480, height = 400, left = 64, right = 20, top = 48, bottom = 56;
    const double pw = width - left - right, ph = height - top - bottom;

    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (!x.empty()) {
        auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
        auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
        x0 = *xmin, x1 = *xmax, y0 = *ymin, y1 = *ymax;
        if (x1 == x0) x0 -= 0.5, x1 += 0.5;
        if (y1 == y0) y0 -= 0.5, y1 += 0.5;
        const double mx = 0.05 * (x1 - x0), my = 0.05 * (y1 - y0);
        x0 -= mx, x1 += mx, y0 -= my, y1 += my;
    }
    auto sx = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
    auto sy = [&](double v) { return top + ph - (v - y0) / (y1 - y0) * ph; };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) +
         "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) + "\" fill=\"white\"/>\n";
    s += "<text x=\"" + fmt(width / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" + escape(spec.title) + "</text>\n";
    s += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(pw) + "\" height=\"" + fmt(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double fx = x0 + (x1 - x0) * t / 4.0, fy = y0 + (y1 - y0) * t / 4.0;
        s += "<text x=\"" + fmt(sx(fx)) + "\" y=\"" + fmt(top + ph + 16) + "\" text-anchor=\"middle\">" + tick(fx) + "</text>\n";
        s += "<text x=\"" + fmt(left - 6) + "\" y=\"" + fmt(sy(fy) + 4) + "\" text-anchor=\"end\">" + tick(fy) + "</text>\n";
    }
    s += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"" + fmt(height - 12) + "\" text-anchor=\"middle\">" + escape(spec.x_label) + "</text>\n";
    s += "<text x=\"16\" y=\"" + fmt(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         fmt(top + ph / 2) + ")\">" + escape(spec.y_label) + "</text>\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += "<circle cx=\"" + fmt(sx(x[i])) + "\" cy=\"" + fmt(sy(y[i])) + "\" r=\"3\" fill=\"steelblue\"/>\n";
        if (!point_labels.empty())
            s += "<text x=\"" + fmt(sx(x[i]) + 4) + "\" y=\"" + fmt(sy(y[i]) - 4) + "\" font-size=\"9\" fill=\"gray\">" +
                 escape(point_labels[i]) + "</text>\n";
    }
    if (!spec.annotation.empty())
        s += "<text x=\"" + fmt(left + 6) + "\" y=\"" + fmt(top + 14) + "\">" + escape(spec.annotation) + "</text>\n";
    s += "</svg>\n";
    return s;
}

}  // namespace dlm
