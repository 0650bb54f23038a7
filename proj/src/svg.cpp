#include "dbmd/svg.hpp"

#include "dbmd/csv.hpp"
#include "dbmd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace dbmd {

namespace {

constexpr int kWidth = 800;
constexpr int kHeight = 560;
constexpr int kMargin = 64;

std::string fmt(double v, const char* spec = "%.3f") {
    char buf[48];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

struct Range {
    double lo;
    double hi;
    double map(double v, double px_lo, double px_hi) const {
        return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
    }
};

Range padded_range(const std::vector<double>& vs) {
    double lo = vs[0], hi = vs[0];
    for (double v : vs) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi - lo;
    const double pad = span > 0.0 ? 0.05 * span : std::max(1.0, std::abs(hi));
    return {lo - pad, hi + pad};
}

void write_plot(const std::vector<double>& xs, const std::vector<double>& ys,
                const std::string& x_label, const std::string& y_label,
                const std::string& path) {
    const Range rx = padded_range(xs);
    const Range ry = padded_range(ys);
    const double px_lo = kMargin, px_hi = kWidth - kMargin;
    const double py_lo = kHeight - kMargin, py_hi = kMargin; // y axis points up

    std::string svg;
    svg.reserve(xs.size() * 16 + 2048);
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
           "\" height=\"" + std::to_string(kHeight) + "\" viewBox=\"0 0 " +
           std::to_string(kWidth) + " " + std::to_string(kHeight) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<rect x=\"" + std::to_string(kMargin) + "\" y=\"" + std::to_string(kMargin) +
           "\" width=\"" + std::to_string(kWidth - 2 * kMargin) + "\" height=\"" +
           std::to_string(kHeight - 2 * kMargin) +
           "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

    svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.2\" points=\"";
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (k)
            svg += ' ';
        svg += fmt(rx.map(xs[k], px_lo, px_hi));
        svg += ',';
        svg += fmt(ry.map(ys[k], py_lo, py_hi));
    }
    svg += "\"/>\n";

    const std::string text_attr = " font-family=\"monospace\" font-size=\"12\" fill=\"black\"";
    svg += "<text x=\"" + std::to_string(kWidth / 2) + "\" y=\"" +
           std::to_string(kHeight - kMargin / 3) + "\" text-anchor=\"middle\"" + text_attr +
           ">" + x_label + "</text>\n";
    svg += "<text x=\"" + std::to_string(kMargin / 3) + "\" y=\"" +
           std::to_string(kHeight / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 " +
           std::to_string(kMargin / 3) + " " + std::to_string(kHeight / 2) + ")\"" +
           text_attr + ">" + y_label + "</text>\n";
    svg += "<text x=\"" + std::to_string(kMargin) + "\" y=\"" +
           std::to_string(kHeight - kMargin + 16) + "\"" + text_attr + ">" +
           fmt(rx.lo, "%.6g") + "</text>\n";
    svg += "<text x=\"" + std::to_string(kWidth - kMargin) + "\" y=\"" +
           std::to_string(kHeight - kMargin + 16) + "\" text-anchor=\"end\"" + text_attr +
           ">" + fmt(rx.hi, "%.6g") + "</text>\n";
    svg += "<text x=\"" + std::to_string(kMargin - 6) + "\" y=\"" +
           std::to_string(kHeight - kMargin) + "\" text-anchor=\"end\"" + text_attr + ">" +
           fmt(ry.lo, "%.6g") + "</text>\n";
    svg += "<text x=\"" + std::to_string(kMargin - 6) + "\" y=\"" +
           std::to_string(kMargin + 4) + "\" text-anchor=\"end\"" + text_attr + ">" +
           fmt(ry.hi, "%.6g") + "</text>\n";
    svg += "</svg>\n";

    write_text_file_atomic(path, svg);
}

} // namespace

void write_hysteresis_svg(const TimeSeries& series, const std::string& path) {
    if (series.samples.empty())
        throw invalid_parameter_error("series: plot needs at least one sample");
    std::vector<double> xs, ys;
    xs.reserve(series.samples.size());
    ys.reserve(series.samples.size());
    for (const Sample& s : series.samples) {
        xs.push_back(s.u);
        ys.push_back(std::asinh(s.i / kReferenceCurrent));
    }
    write_plot(xs, ys, "u / V", "asinh(i / 1 pA)", path);
}

void write_step_svg(const TimeSeries& series, const std::string& path) {
    if (series.samples.empty())
        throw invalid_parameter_error("series: plot needs at least one sample");
    std::vector<double> xs, ys;
    xs.reserve(series.samples.size());
    ys.reserve(series.samples.size());
    for (const Sample& s : series.samples) {
        xs.push_back(s.t);
        ys.push_back(s.i);
    }
    write_plot(xs, ys, "t / s", "i / A", path);
}

} // namespace dbmd
