#include "tailhedge/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace tailhedge {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);
constexpr int kMarginLeft = 70, kMarginRight = 20, kMarginTop = 40, kMarginBottom = 50;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    return out;
}

struct Frame {
    int width, height;
    double x_lo, x_hi, y_lo, y_hi;

    [[nodiscard]] double px(double x) const {
        return kMarginLeft + (x - x_lo) / (x_hi - x_lo) * (width - kMarginLeft - kMarginRight);
    }
    [[nodiscard]] double py(double y) const {
        return height - kMarginBottom -
               (y - y_lo) / (y_hi - y_lo) * (height - kMarginTop - kMarginBottom);
    }
};

void pad_range(double& lo, double& hi) {
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    } else {
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
}

std::string header(std::string_view title, int width, int height) {
    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
           " " + std::to_string(height) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + std::to_string(width / 2) +
           "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
           escape(title) + "</text>\n";
    return out;
}

std::string y_axis(const Frame& f) {
    std::string out;
    for (int i = 0; i <= 4; ++i) {
        const double y = f.y_lo + (f.y_hi - f.y_lo) * i / 4.0;
        const double yy = f.py(y);
        out += "<line x1=\"" + std::to_string(kMarginLeft) + "\" y1=\"" + fmt(yy) + "\" x2=\"" +
               std::to_string(f.width - kMarginRight) + "\" y2=\"" + fmt(yy) +
               "\" stroke=\"#dddddd\"/>\n";
        out += "<text x=\"" + std::to_string(kMarginLeft - 6) + "\" y=\"" + fmt(yy + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + fmt(y) +
               "</text>\n";
    }
    return out;
}

std::string legend(const Frame& f, std::span<const SvgSeries> series) {
    std::string out;
    double y = kMarginTop + 6;
    for (std::size_t s = 0; s < series.size(); ++s) {
        const double x = f.width - kMarginRight - 170;
        out += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y - 9) +
               "\" width=\"12\" height=\"12\" fill=\"" + kPalette[s % kPaletteSize] + "\"/>\n";
        out += "<text x=\"" + fmt(x + 18) + "\" y=\"" + fmt(y + 2) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + escape(series[s].label) +
               "</text>\n";
        y += 18;
    }
    return out;
}

void check_series(std::span<const SvgSeries> series) {
    if (series.empty()) throw std::invalid_argument("svg: no series");
    for (const auto& s : series) {
        if (s.ys.empty()) throw std::invalid_argument("svg: empty series '" + s.label + "'");
        if (s.ys.size() != series.front().ys.size())
            throw std::invalid_argument("svg: series lengths differ");
        for (double v : s.ys)
            if (!std::isfinite(v))
                throw std::invalid_argument("svg: non-finite value in '" + s.label + "'");
    }
}

}  // namespace

std::string line_chart_svg(std::string_view title, std::span<const std::string> x_labels,
                           std::span<const SvgSeries> series, int width, int height) {
    check_series(series);
    const std::size_t n = series.front().ys.size();
    if (!x_labels.empty() && x_labels.size() != n)
        throw std::invalid_argument("svg: x label count does not match the series");
    double y_lo = series.front().ys.front(), y_hi = y_lo;
    for (const auto& s : series)
        for (double v : s.ys) {
            y_lo = std::min(y_lo, v);
            y_hi = std::max(y_hi, v);
        }
    pad_range(y_lo, y_hi);
    Frame f{width, height, 0.0, n > 1 ? static_cast<double>(n - 1) : 1.0, y_lo, y_hi};

    std::string out = header(title, width, height);
    out += y_axis(f);
    const std::size_t n_ticks = std::min<std::size_t>(n, 8);
    for (std::size_t i = 0; i < n_ticks; ++i) {
        const std::size_t idx = n_ticks > 1 ? i * (n - 1) / (n_ticks - 1) : 0;
        const double xx = f.px(static_cast<double>(idx));
        out += "<line x1=\"" + fmt(xx) + "\" y1=\"" + std::to_string(height - kMarginBottom) +
               "\" x2=\"" + fmt(xx) + "\" y2=\"" + std::to_string(height - kMarginBottom + 5) +
               "\" stroke=\"black\"/>\n";
        const std::string label = x_labels.empty() ? std::to_string(idx) : x_labels[idx];
        out += "<text x=\"" + fmt(xx) + "\" y=\"" + std::to_string(height - kMarginBottom + 20) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
               escape(label) + "</text>\n";
    }
    for (std::size_t s = 0; s < series.size(); ++s) {
        out += "<polyline fill=\"none\" stroke=\"" + std::string(kPalette[s % kPaletteSize]) +
               "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < n; ++i) {
            if (i) out += ' ';
            out += fmt(f.px(static_cast<double>(i))) + "," + fmt(f.py(series[s].ys[i]));
        }
        out += "\"/>\n";
    }
    out += legend(f, series);
    out += "</svg>\n";
    return out;
}

std::string histogram_svg(std::string_view title, std::span<const double> edges,
                          std::span<const SvgSeries> series, int width, int height) {
    check_series(series);
    if (edges.size() != series.front().ys.size() + 1)
        throw std::invalid_argument("svg: need one more edge than bins");
    double y_hi = 0.0;
    for (const auto& s : series)
        for (double v : s.ys) y_hi = std::max(y_hi, v);
    if (y_hi == 0.0) y_hi = 1.0;
    y_hi *= 1.05;
    Frame f{width, height, edges.front(), edges.back(), 0.0, y_hi};
    if (f.x_lo == f.x_hi) {
        f.x_lo -= 0.5;
        f.x_hi += 0.5;
    }

    std::string out = header(title, width, height);
    out += y_axis(f);
    const std::size_t n_bins = series.front().ys.size();
    const std::size_t n_ticks = std::min<std::size_t>(edges.size(), 8);
    for (std::size_t i = 0; i < n_ticks; ++i) {
        const std::size_t idx = n_ticks > 1 ? i * (edges.size() - 1) / (n_ticks - 1) : 0;
        const double xx = f.px(edges[idx]);
        out += "<line x1=\"" + fmt(xx) + "\" y1=\"" + std::to_string(height - kMarginBottom) +
               "\" x2=\"" + fmt(xx) + "\" y2=\"" + std::to_string(height - kMarginBottom + 5) +
               "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + fmt(xx) + "\" y=\"" + std::to_string(height - kMarginBottom + 20) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
               fmt(edges[idx]) + "</text>\n";
    }
    for (std::size_t b = 0; b < n_bins; ++b) {
        const double x0 = f.px(edges[b]);
        const double x1 = f.px(edges[b + 1]);
        const double slot = (x1 - x0) / static_cast<double>(series.size());
        for (std::size_t s = 0; s < series.size(); ++s) {
            const double v = series[s].ys[b];
            if (v <= 0.0) continue;
            out += "<rect x=\"" + fmt(x0 + slot * static_cast<double>(s)) + "\" y=\"" +
                   fmt(f.py(v)) + "\" width=\"" + fmt(std::max(slot - 1.0, 0.5)) +
                   "\" height=\"" + fmt(f.py(0.0) - f.py(v)) + "\" fill=\"" +
                   kPalette[s % kPaletteSize] + "\" fill-opacity=\"0.8\"/>\n";
        }
    }
    out += legend(f, series);
    out += "</svg>\n";
    return out;
}

}  // namespace tailhedge
