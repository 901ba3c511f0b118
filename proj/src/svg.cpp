#include "mkc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "mkc/errors.hpp"

namespace mkc {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 40.0, kBottom = 50.0;

std::string escape_xml(const std::string& s) {
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

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finalize() {
        if (!(lo < hi)) {
            const double c = std::isfinite(lo) ? lo : 0.0;
            lo = c - 1.0;
            hi = c + 1.0;
        }
        const double pad = 0.04 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
};

class Panel {
  public:
    Panel(Range xr, Range yr) : xr_(xr), yr_(yr) {}
    double px(double x) const {
        return kLeft + (x - xr_.lo) / (xr_.hi - xr_.lo) * (kWidth - kLeft - kRight);
    }
    double py(double y) const {
        return kHeight - kBottom -
               (y - yr_.lo) / (yr_.hi - yr_.lo) * (kHeight - kTop - kBottom);
    }
    const Range& xr() const { return xr_; }
    const Range& yr() const { return yr_; }

  private:
    Range xr_, yr_;
};

std::vector<double> nice_ticks(double lo, double hi, int want = 6) {
    const double span = hi - lo;
    double step = std::pow(10.0, std::floor(std::log10(span / want)));
    for (double mult : {1.0, 2.0, 5.0, 10.0}) {
        if (span / (step * mult) <= want) {
            step *= mult;
            break;
        }
    }
    std::vector<double> ticks;
    double t = std::ceil(lo / step) * step;
    for (; t <= hi + 1e-12 * span; t += step) ticks.push_back(t);
    return ticks;
}

void open_chart(std::ostream& out, const std::string& title, const std::string& x_label,
                const std::string& y_label, const Panel& p) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth)
        << "\" height=\"" << fmt(kHeight) << "\" viewBox=\"0 0 " << fmt(kWidth) << " "
        << fmt(kHeight) << "\">\n";
    out << "<rect width=\"" << fmt(kWidth) << "\" height=\"" << fmt(kHeight)
        << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << fmt(kWidth / 2)
        << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" font-family=\"sans-serif\">"
        << escape_xml(title) << "</text>\n";

    // Axes box and ticks.
    out << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\""
        << fmt(kWidth - kLeft - kRight) << "\" height=\"" << fmt(kHeight - kTop - kBottom)
        << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
    for (double t : nice_ticks(p.xr().lo, p.xr().hi)) {
        const double x = p.px(t);
        out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(kHeight - kBottom)
            << "\" x2=\"" << fmt(x) << "\" y2=\"" << fmt(kHeight - kBottom + 5)
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(kHeight - kBottom + 18)
            << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">"
            << fmt(t) << "</text>\n";
    }
    for (double t : nice_ticks(p.yr().lo, p.yr().hi)) {
        const double y = p.py(t);
        out << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(y) << "\" x2=\""
            << fmt(kLeft) << "\" y2=\"" << fmt(y) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(y + 4)
            << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">"
            << fmt(t) << "</text>\n";
    }
    out << "<text x=\"" << fmt((kLeft + kWidth - kRight) / 2) << "\" y=\""
        << fmt(kHeight - 12)
        << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">"
        << escape_xml(x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << fmt((kTop + kHeight - kBottom) / 2)
        << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" "
        << "transform=\"rotate(-90 16 " << fmt((kTop + kHeight - kBottom) / 2) << ")\">"
        << escape_xml(y_label) << "</text>\n";
}

void draw_series(std::ostream& out, const Panel& p, const SvgSeries& s) {
    std::ostringstream pts;
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
        if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
        pts << fmt(p.px(s.xs[i])) << "," << fmt(p.py(s.ys[i])) << " ";
    }
    out << "<polyline fill=\"none\" stroke=\"" << escape_xml(s.color)
        << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
}

void draw_legend(std::ostream& out, const std::vector<SvgSeries>& series) {
    double y = kTop + 14;
    for (const auto& s : series) {
        if (s.label.empty()) continue;
        out << "<line x1=\"" << fmt(kWidth - kRight - 130) << "\" y1=\"" << fmt(y - 4)
            << "\" x2=\"" << fmt(kWidth - kRight - 106) << "\" y2=\"" << fmt(y - 4)
            << "\" stroke=\"" << escape_xml(s.color) << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << fmt(kWidth - kRight - 100) << "\" y=\"" << fmt(y)
            << "\" font-size=\"11\" font-family=\"sans-serif\">" << escape_xml(s.label)
            << "</text>\n";
        y += 16;
    }
}

std::ofstream open_file(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open for writing");
    return out;
}

}  // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<SvgSeries>& series) {
    Range xr, yr;
    for (const auto& s : series) {
        if (s.xs.size() != s.ys.size()) throw ShapeError("series xs/ys length mismatch");
        for (double v : s.xs) xr.add(v);
        for (double v : s.ys) yr.add(v);
    }
    xr.finalize();
    yr.finalize();
    Panel p(xr, yr);
    auto out = open_file(path);
    open_chart(out, title, x_label, y_label, p);
    for (const auto& s : series) draw_series(out, p, s);
    draw_legend(out, series);
    out << "</svg>\n";
    if (!out) throw IoError(path + ": write failed");
}

void write_histogram_chart(const std::string& path, const std::string& title,
                           const std::string& x_label, const std::string& y_label,
                           const SvgBars& bars, const std::vector<SvgSeries>& curves) {
    if (bars.edges.size() != bars.heights.size() + 1)
        throw ShapeError("histogram needs len(edges) == len(heights) + 1");
    Range xr, yr;
    for (double v : bars.edges) xr.add(v);
    for (double v : bars.heights) yr.add(v);
    yr.add(0.0);
    for (const auto& s : curves) {
        if (s.xs.size() != s.ys.size()) throw ShapeError("series xs/ys length mismatch");
        for (double v : s.xs) xr.add(v);
        for (double v : s.ys) yr.add(v);
    }
    xr.finalize();
    yr.finalize();
    Panel p(xr, yr);
    auto out = open_file(path);
    open_chart(out, title, x_label, y_label, p);
    for (std::size_t i = 0; i < bars.heights.size(); ++i) {
        const double x0 = p.px(bars.edges[i]);
        const double x1 = p.px(bars.edges[i + 1]);
        const double y0 = p.py(bars.heights[i]);
        const double base = p.py(0.0);
        out << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(std::min(y0, base))
            << "\" width=\"" << fmt(std::max(0.5, x1 - x0)) << "\" height=\""
            << fmt(std::abs(base - y0)) << "\" fill=\"" << escape_xml(bars.color)
            << "\" stroke=\"none\"/>\n";
    }
    for (const auto& s : curves) draw_series(out, p, s);
    draw_legend(out, curves);
    out << "</svg>\n";
    if (!out) throw IoError(path + ": write failed");
}

}  // namespace mkc
