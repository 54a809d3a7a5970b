#include "quantbench/svg.hpp"

#include <algorithm>

#include "quantbench/num_format.hpp"

namespace quantbench::svg {

namespace {

constexpr double kWidth = 800;
constexpr double kHeight = 500;
constexpr double kMargin = 60;

struct Extent {
    double lo = 0;
    double hi = 1;

    double scale(double v, double out_lo, double out_hi) const {
        const double span = hi - lo;
        const double t = span == 0 ? 0.5 : (v - lo) / span;
        return out_lo + t * (out_hi - out_lo);
    }
};

Extent extent_of(const std::vector<double>& values) {
    Extent e;
    if (values.empty()) return e;
    e.lo = *std::min_element(values.begin(), values.end());
    e.hi = *std::max_element(values.begin(), values.end());
    return e;
}

std::string header() {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + format_double(kWidth) +
           " " + format_double(kHeight) + "\">\n"
           "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string axes() {
    const auto x0 = format_double(kMargin);
    const auto y0 = format_double(kHeight - kMargin);
    const auto x1 = format_double(kWidth - kMargin);
    const auto y1 = format_double(kMargin);
    return "<line x1=\"" + x0 + "\" y1=\"" + y0 + "\" x2=\"" + x1 + "\" y2=\"" + y0 +
           "\" stroke=\"black\"/>\n"
           "<line x1=\"" + x0 + "\" y1=\"" + y0 + "\" x2=\"" + x0 + "\" y2=\"" + y1 +
           "\" stroke=\"black\"/>\n";
}

std::string text(double x, double y, const std::string& content, const char* anchor = "start") {
    return "<text x=\"" + format_double(x) + "\" y=\"" + format_double(y) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"" + anchor + "\">" +
           content + "</text>\n";
}

std::string polyline(const std::vector<double>& values, const Extent& y_extent,
                     const char* color) {
    std::string points;
    const std::size_t n = values.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double x = n == 1 ? kMargin
                                : kMargin + (kWidth - 2 * kMargin) *
                                                static_cast<double>(i) /
                                                static_cast<double>(n - 1);
        const double y = y_extent.scale(values[i], kHeight - kMargin, kMargin);
        if (i) points += ' ';
        points += format_double(x) + "," + format_double(y);
    }
    return "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
}

} // namespace

std::string line_chart(const std::vector<data::Date>& dates,
                       const std::vector<double>& continuous,
                       const std::vector<double>& indicative) {
    std::vector<double> all = continuous;
    all.insert(all.end(), indicative.begin(), indicative.end());
    const auto y_extent = extent_of(all);

    std::string out = header();
    out += axes();
    out += polyline(continuous, y_extent, "#1f77b4");
    out += polyline(indicative, y_extent, "#d62728");

    if (!dates.empty()) {
        out += text(kMargin, kHeight - kMargin + 20, data::to_string(dates.front()));
        out += text(kWidth - kMargin, kHeight - kMargin + 20, data::to_string(dates.back()), "end");
    }
    out += text(kMargin - 8, kHeight - kMargin, format_double(y_extent.lo, 6), "end");
    out += text(kMargin - 8, kMargin + 4, format_double(y_extent.hi, 6), "end");
    out += text(kMargin + 10, kMargin - 30, "continuous");
    out += "<rect x=\"" + format_double(kMargin - 14) + "\" y=\"" + format_double(kMargin - 40) +
           "\" width=\"10\" height=\"10\" fill=\"#1f77b4\"/>\n";
    out += text(kMargin + 110, kMargin - 30, "indicative");
    out += "<rect x=\"" + format_double(kMargin + 86) + "\" y=\"" + format_double(kMargin - 40) +
           "\" width=\"10\" height=\"10\" fill=\"#d62728\"/>\n";
    out += "</svg>\n";
    return out;
}

std::string scatter_chart(const std::vector<std::pair<double, double>>& points,
                          const std::string& x_label, const std::string& y_label) {
    std::vector<double> xs;
    std::vector<double> ys;
    xs.reserve(points.size());
    ys.reserve(points.size());
    for (const auto& [x, y] : points) {
        xs.push_back(x);
        ys.push_back(y);
    }
    const auto x_extent = extent_of(xs);
    const auto y_extent = extent_of(ys);

    std::string out = header();
    out += axes();
    for (const auto& [x, y] : points) {
        out += "<circle cx=\"" + format_double(x_extent.scale(x, kMargin, kWidth - kMargin)) +
               "\" cy=\"" + format_double(y_extent.scale(y, kHeight - kMargin, kMargin)) +
               "\" r=\"2\" fill=\"#1f77b4\" fill-opacity=\"0.5\"/>\n";
    }
    out += text(kWidth / 2, kHeight - kMargin + 40, x_label, "middle");
    out += text(kMargin, kMargin - 10, y_label);
    out += text(kMargin, kHeight - kMargin + 16, format_double(x_extent.lo, 4));
    out += text(kWidth - kMargin, kHeight - kMargin + 16, format_double(x_extent.hi, 4), "end");
    out += text(kMargin - 8, kHeight - kMargin, format_double(y_extent.lo, 4), "end");
    out += text(kMargin - 8, kMargin + 4, format_double(y_extent.hi, 4), "end");
    out += "</svg>\n";
    return out;
}

} // namespace quantbench::svg
