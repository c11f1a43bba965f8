#pragma once

// Deterministic SVG line charts. Fixed 900x540 canvas, Tableau-10 palette,
// ticks at round numbers, legend on the right. Coordinates are printed with
// two decimals so identical inputs give identical bytes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "format.hpp"

namespace slicecast::svg {

inline constexpr double kWidth = 900.0;
inline constexpr double kHeight = 540.0;
inline constexpr double kLeft = 72.0;
inline constexpr double kRight = 190.0; // legend gutter
inline constexpr double kTop = 44.0;
inline constexpr double kBottom = 62.0;

inline constexpr std::array<std::string_view, 10> kPalette{"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                                           "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

enum class Style { line, points };

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct Series {
    std::string label;
    std::vector<Point> points;
    Style style = Style::line;
};

struct ChartSpec {
    std::string title;
    std::string x_label = "effective model size M";
    std::string y_label;
    std::vector<Series> series;
    std::optional<double> threshold; // vertical marker; also splits point series into train/test
};

inline std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s(buf);
    if (s == "-0.00") s = "0.00";
    return s;
}

inline std::string xml_escape(std::string_view s) {
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

// 1, 2 or 5 times a power of ten, close to range / target.
inline double nice_step(double range, int target = 6) {
    if (!(range > 0.0)) return 1.0;
    const double raw = range / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / mag;
    const double nice = f < 1.5 ? 1.0 : (f < 3.0 ? 2.0 : (f < 7.0 ? 5.0 : 10.0));
    return nice * mag;
}

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    double step = 0.2;

    std::vector<double> ticks() const {
        std::vector<double> t;
        const long long n = std::llround((hi - lo) / step);
        for (long long i = 0; i <= n; ++i) t.push_back(lo + step * static_cast<double>(i));
        return t;
    }
};

inline Axis nice_axis(double lo, double hi) {
    if (hi - lo < 1e-12) {
        const double pad = std::max(std::abs(lo) * 0.1, 0.05);
        lo -= pad;
        hi += pad;
    }
    Axis a;
    a.step = nice_step(hi - lo);
    a.lo = std::floor(lo / a.step + 1e-9) * a.step;
    a.hi = std::ceil(hi / a.step - 1e-9) * a.step;
    return a;
}

inline std::string tick_label(double v, double step) {
    const int decimals = std::max(0, -static_cast<int>(std::floor(std::log10(step) + 1e-9)));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s(buf);
    if (s.size() > 1 && s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

inline void validate(const ChartSpec& spec) {
    if (spec.series.empty()) throw ValidationError("chart needs at least one series");
    for (const auto& s : spec.series) {
        if (s.points.empty()) throw ValidationError("series '" + s.label + "' has no points");
        for (const auto& p : s.points)
            if (!std::isfinite(p.x) || !std::isfinite(p.y))
                throw ValidationError("series '" + s.label + "' contains a non-finite point");
    }
    if (spec.threshold && !std::isfinite(*spec.threshold)) throw ValidationError("threshold marker is not finite");
}

inline std::string render(const ChartSpec& spec) {
    validate(spec);
    double xlo = spec.series[0].points[0].x, xhi = xlo;
    double ylo = spec.series[0].points[0].y, yhi = ylo;
    for (const auto& s : spec.series)
        for (const auto& p : s.points) {
            xlo = std::min(xlo, p.x);
            xhi = std::max(xhi, p.x);
            ylo = std::min(ylo, p.y);
            yhi = std::max(yhi, p.y);
        }
    if (spec.threshold) {
        xlo = std::min(xlo, *spec.threshold);
        xhi = std::max(xhi, *spec.threshold);
    }
    const Axis ax = nice_axis(xlo, xhi);
    const Axis ay = nice_axis(ylo, yhi);

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - ax.lo) / (ax.hi - ax.lo) * pw; };
    auto py = [&](double y) { return kTop + ph - (y - ay.lo) / (ay.hi - ay.lo) * ph; };

    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"540\" viewBox=\"0 0 900 540\" "
         "font-family=\"Helvetica, Arial, sans-serif\" font-size=\"12\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"900\" height=\"540\" fill=\"#ffffff\"/>\n";
    if (!spec.title.empty())
        o << "<text x=\"" << fixed2(kLeft + pw / 2) << "\" y=\"24.00\" text-anchor=\"middle\" font-size=\"15\">"
          << xml_escape(spec.title) << "</text>\n";

    // grid and ticks
    o << "<g stroke=\"#e5e5e5\" stroke-width=\"1\">\n";
    for (double t : ax.ticks())
        o << "<line x1=\"" << fixed2(px(t)) << "\" y1=\"" << fixed2(kTop) << "\" x2=\"" << fixed2(px(t)) << "\" y2=\""
          << fixed2(kTop + ph) << "\"/>\n";
    for (double t : ay.ticks())
        o << "<line x1=\"" << fixed2(kLeft) << "\" y1=\"" << fixed2(py(t)) << "\" x2=\"" << fixed2(kLeft + pw)
          << "\" y2=\"" << fixed2(py(t)) << "\"/>\n";
    o << "</g>\n";
    o << "<rect x=\"" << fixed2(kLeft) << "\" y=\"" << fixed2(kTop) << "\" width=\"" << fixed2(pw) << "\" height=\""
      << fixed2(ph) << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    o << "<g fill=\"#333333\">\n";
    for (double t : ax.ticks())
        o << "<text x=\"" << fixed2(px(t)) << "\" y=\"" << fixed2(kTop + ph + 18) << "\" text-anchor=\"middle\">"
          << tick_label(t, ax.step) << "</text>\n";
    for (double t : ay.ticks())
        o << "<text x=\"" << fixed2(kLeft - 8) << "\" y=\"" << fixed2(py(t) + 4) << "\" text-anchor=\"end\">"
          << tick_label(t, ay.step) << "</text>\n";
    o << "<text x=\"" << fixed2(kLeft + pw / 2) << "\" y=\"" << fixed2(kHeight - 18)
      << "\" text-anchor=\"middle\">" << xml_escape(spec.x_label) << "</text>\n";
    o << "<text x=\"18.00\" y=\"" << fixed2(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18.00 "
      << fixed2(kTop + ph / 2) << ")\">" << xml_escape(spec.y_label) << "</text>\n";
    o << "</g>\n";

    if (spec.threshold) {
        const double x = px(*spec.threshold);
        o << "<line x1=\"" << fixed2(x) << "\" y1=\"" << fixed2(kTop) << "\" x2=\"" << fixed2(x) << "\" y2=\""
          << fixed2(kTop + ph) << "\" stroke=\"#555555\" stroke-width=\"1.2\" stroke-dasharray=\"6 4\"/>\n";
        o << "<text x=\"" << fixed2(x + 4) << "\" y=\"" << fixed2(kTop + 14) << "\" fill=\"#555555\">T = "
          << xml_escape(format_double(*spec.threshold)) << "</text>\n";
    }

    for (std::size_t i = 0; i < spec.series.size(); ++i) {
        const auto& s = spec.series[i];
        const auto color = kPalette[i % kPalette.size()];
        o << "<g>\n";
        if (s.style == Style::line || s.points.size() > 1) {
            o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
              << (s.style == Style::line ? "2" : "1") << "\"";
            if (s.style == Style::points) o << " stroke-opacity=\"0.5\"";
            o << " points=\"";
            for (std::size_t k = 0; k < s.points.size(); ++k)
                o << (k ? " " : "") << fixed2(px(s.points[k].x)) << ',' << fixed2(py(s.points[k].y));
            o << "\"/>\n";
        }
        if (s.style == Style::points) {
            for (const auto& p : s.points) {
                const bool test = spec.threshold && p.x >= *spec.threshold;
                o << "<circle cx=\"" << fixed2(px(p.x)) << "\" cy=\"" << fixed2(py(p.y)) << "\" r=\"3.5\" ";
                if (test)
                    o << "fill=\"#ffffff\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
                else
                    o << "fill=\"" << color << "\"/>\n";
            }
        }
        o << "</g>\n";
    }

    // legend
    const double lx = kWidth - kRight + 16;
    o << "<g font-size=\"11\">\n";
    for (std::size_t i = 0; i < spec.series.size(); ++i) {
        const auto color = kPalette[i % kPalette.size()];
        const double ly = kTop + 10 + 18.0 * static_cast<double>(i);
        if (spec.series[i].style == Style::line)
            o << "<line x1=\"" << fixed2(lx) << "\" y1=\"" << fixed2(ly) << "\" x2=\"" << fixed2(lx + 20) << "\" y2=\""
              << fixed2(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        else
            o << "<circle cx=\"" << fixed2(lx + 10) << "\" cy=\"" << fixed2(ly) << "\" r=\"3.5\" fill=\"" << color
              << "\"/>\n";
        o << "<text x=\"" << fixed2(lx + 26) << "\" y=\"" << fixed2(ly + 4) << "\">" << xml_escape(spec.series[i].label)
          << "</text>\n";
    }
    o << "</g>\n</svg>\n";
    return o.str();
}

} // namespace slicecast::svg
