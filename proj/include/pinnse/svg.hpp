#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "pinnse/errors.hpp"

namespace pinnse::bench {

struct Series {
    std::string label;
    std::vector<double> x; // empty means 1..n
    std::vector<double> y;
};

namespace detail {

inline void svgf(std::string& out, const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    out += buf;
}

inline std::string esc(const std::string& s) {
    std::string r;
    for (char c : s) {
        if (c == '<')
            r += "&lt;";
        else if (c == '>')
            r += "&gt;";
        else if (c == '&')
            r += "&amp;";
        else
            r += c;
    }
    return r;
}

inline const char* series_color(size_t k) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    return palette[k % (sizeof palette / sizeof *palette)];
}

// piecewise blue -> white -> red
inline std::string heat_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    auto lerp = [](int a, int b, double u) { return static_cast<int>(a + (b - a) * u + 0.5); };
    int r, g, b;
    if (t < 0.5) {
        const double u = t / 0.5;
        r = lerp(0x21, 0xf7, u);
        g = lerp(0x66, 0xf7, u);
        b = lerp(0xac, 0xf7, u);
    } else {
        const double u = (t - 0.5) / 0.5;
        r = lerp(0xf7, 0xb2, u);
        g = lerp(0xf7, 0x18, u);
        b = lerp(0xf7, 0x2b, u);
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

} // namespace detail

// Multi-series line chart. Returns an empty string when no series carries a
// finite point, so callers can skip the file and warn instead.
inline std::string line_chart(const std::vector<Series>& series, const std::string& title,
                              const std::string& x_label, const std::string& y_label) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    bool any = false;
    for (const auto& s : series) {
        for (size_t i = 0; i < s.y.size(); ++i) {
            const double xv = s.x.empty() ? static_cast<double>(i + 1) : s.x[i];
            if (!std::isfinite(xv) || !std::isfinite(s.y[i])) continue;
            any = true;
            xmin = std::min(xmin, xv);
            xmax = std::max(xmax, xv);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    if (!any) return "";
    if (xmax == xmin) {
        xmin -= 1.0;
        xmax += 1.0;
    }
    if (ymax == ymin) {
        ymin -= 1.0;
        ymax += 1.0;
    }
    const double pad = 0.04 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    const double W = 760, H = 440, L = 70, R = 600, T = 46, B = 392;
    auto px = [&](double v) { return L + (v - xmin) / (xmax - xmin) * (R - L); };
    auto py = [&](double v) { return B - (v - ymin) / (ymax - ymin) * (B - T); };

    std::string out;
    detail::svgf(out,
                 "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 %.0f %.0f\" "
                 "font-family=\"sans-serif\" font-size=\"12\">\n",
                 W, H);
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    detail::svgf(out,
                 "<text x=\"%.0f\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">%s</text>\n",
                 (L + R) / 2, detail::esc(title).c_str());

    // axes and ticks
    detail::svgf(out,
                 "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", L,
                 B, R, B);
    detail::svgf(out,
                 "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", L,
                 T, L, B);
    for (int k = 0; k <= 5; ++k) {
        const double fx = xmin + (xmax - xmin) * k / 5.0;
        const double fy = ymin + (ymax - ymin) * k / 5.0;
        detail::svgf(out,
                     "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ccc\"/>\n",
                     px(fx), B, px(fx), T);
        detail::svgf(out,
                     "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%.3g</text>\n", px(fx),
                     B + 16, fx);
        detail::svgf(out,
                     "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ccc\"/>\n",
                     L, py(fy), R, py(fy));
        detail::svgf(out, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.3g</text>\n", L - 6,
                     py(fy) + 4, fy);
    }
    detail::svgf(out,
                 "<text x=\"%.0f\" y=\"%.0f\" text-anchor=\"middle\">%s</text>\n", (L + R) / 2,
                 H - 10, detail::esc(x_label).c_str());
    detail::svgf(out,
                 "<text x=\"18\" y=\"%.0f\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
                 "%.0f)\">%s</text>\n",
                 (T + B) / 2, (T + B) / 2, detail::esc(y_label).c_str());

    // series polylines, split at non-finite points
    for (size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = detail::series_color(si);
        std::string pts;
        auto flush = [&] {
            if (!pts.empty()) {
                detail::svgf(out,
                             "<polyline points=\"%s\" fill=\"none\" stroke=\"%s\" "
                             "stroke-width=\"1.6\"/>\n",
                             pts.c_str(), color);
                pts.clear();
            }
        };
        for (size_t i = 0; i < s.y.size(); ++i) {
            const double xv = s.x.empty() ? static_cast<double>(i + 1) : s.x[i];
            if (!std::isfinite(xv) || !std::isfinite(s.y[i])) {
                flush();
                continue;
            }
            detail::svgf(pts, "%.2f,%.2f ", px(xv), py(s.y[i]));
        }
        flush();
        // legend
        const double ly = T + 18.0 * static_cast<double>(si);
        detail::svgf(out,
                     "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"%s\" "
                     "stroke-width=\"2\"/>\n",
                     R + 12, ly, R + 36, ly, color);
        detail::svgf(out, "<text x=\"%.1f\" y=\"%.1f\">%s</text>\n", R + 42, ly + 4,
                     detail::esc(s.label).c_str());
    }
    out += "</svg>\n";
    return out;
}

struct HeatCell {
    double ld = 0.0, lp = 0.0, lc = 0.0;
    double value = 0.0;
};

// Ternary heatmap over the loss-weight simplex: the data corner is up,
// physics lower-left, constants lower-right. Non-finite cells render grey.
inline std::string simplex_heatmap(const std::vector<HeatCell>& cells, const std::string& title) {
    if (cells.empty()) return "";
    double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
    for (const auto& c : cells) {
        if (!std::isfinite(c.value)) continue;
        vmin = std::min(vmin, c.value);
        vmax = std::max(vmax, c.value);
    }
    if (!std::isfinite(vmin)) return ""; // nothing usable
    if (vmax == vmin) vmax = vmin + 1.0;

    // triangle side count from the cell count: cells = (n+1)(n+2)/2
    const double nf = 0.5 * (std::sqrt(8.0 * static_cast<double>(cells.size()) + 1.0) - 3.0);
    const double n = std::max(1.0, std::round(nf));

    const double W = 640, H = 560;
    const double ax = 320, ay = 70;   // lambda_d = 1
    const double bx = 80, by = 486;   // lambda_p = 1
    const double cx = 560, cy = 486;  // lambda_c = 1
    const double side = cx - bx;
    const double r = std::max(4.0, 0.42 * side / n);

    std::string out;
    detail::svgf(out,
                 "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 %.0f %.0f\" "
                 "font-family=\"sans-serif\" font-size=\"12\">\n",
                 W, H);
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    detail::svgf(out,
                 "<text x=\"%.0f\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">%s</text>\n",
                 W / 2, detail::esc(title).c_str());
    detail::svgf(
        out,
        "<polygon points=\"%.1f,%.1f %.1f,%.1f %.1f,%.1f\" fill=\"none\" stroke=\"#888\"/>\n", ax,
        ay, bx, by, cx, cy);

    for (const auto& c : cells) {
        const double x = c.ld * ax + c.lp * bx + c.lc * cx;
        const double y = c.ld * ay + c.lp * by + c.lc * cy;
        std::string fill = std::isfinite(c.value)
                               ? detail::heat_color((c.value - vmin) / (vmax - vmin))
                               : std::string("#999999");
        detail::svgf(out, "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"%.1f\" fill=\"%s\"/>\n", x, y, r,
                     fill.c_str());
    }

    detail::svgf(out, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">data</text>\n", ax,
                 ay - 12);
    detail::svgf(out, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">physics</text>\n", bx - 6,
                 by + 16);
    detail::svgf(out, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"start\">constants</text>\n",
                 cx + 6, cy + 16);

    // color bar
    for (int k = 0; k < 100; ++k) {
        const double y0 = 460.0 - 3.2 * k;
        detail::svgf(out, "<rect x=\"600\" y=\"%.1f\" width=\"16\" height=\"3.4\" fill=\"%s\"/>\n",
                     y0, detail::heat_color(k / 99.0).c_str());
    }
    detail::svgf(out, "<text x=\"598\" y=\"468\" text-anchor=\"end\">%.3g</text>\n", vmin);
    detail::svgf(out, "<text x=\"598\" y=\"148\" text-anchor=\"end\">%.3g</text>\n", vmax);
    out += "</svg>\n";
    return out;
}

} // namespace pinnse::bench
