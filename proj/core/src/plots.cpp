#include "mfid/plots.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>

#include "mfid/pipeline.hpp"

namespace mfid::svg {

namespace {

std::string num(double v) {
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
            default: out.push_back(c);
        }
    }
    return out;
}

// Linear ramp from near-white to dark blue.
std::string ramp_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const auto channel = [t](int a, int b) { return static_cast<int>(a + (b - a) * t + 0.5); };
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", channel(247, 8), channel(251, 48), channel(255, 107));
    return buf;
}

void open_svg(std::ostringstream& out, int w, int h, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
    out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\">"
        << escape(title) << "</text>\n";
}

void heatmap(std::ostringstream& out, const PersistenceImage& pi, double scale_max, double x0,
             double y0, double size, const std::string& label) {
    const double cw = size / static_cast<double>(pi.cols());
    const double ch = size / static_cast<double>(pi.rows());
    out << "<g>\n";
    for (std::size_t r = 0; r < pi.rows(); ++r) {
        // Row 0 (lowest persistence) is drawn at the bottom.
        const double y = y0 + size - static_cast<double>(r + 1) * ch;
        for (std::size_t c = 0; c < pi.cols(); ++c) {
            const double t = scale_max > 0.0 ? pi(r, c) / scale_max : 0.0;
            out << "<rect x=\"" << num(x0 + static_cast<double>(c) * cw) << "\" y=\"" << num(y)
                << "\" width=\"" << num(cw) << "\" height=\"" << num(ch) << "\" fill=\""
                << ramp_color(t) << "\"/>\n";
        }
    }
    out << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(size)
        << "\" height=\"" << num(size) << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(x0 + size / 2) << "\" y=\"" << num(y0 + size + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escape(label)
        << " (birth →)</text>\n";
    out << "</g>\n";
}

struct Range {
    double lo;
    double hi;
};

Range axis_range(const std::vector<ProjectionRow>& rows, std::size_t axis) {
    Range r{0.0, 0.0};
    bool first = true;
    for (const auto& row : rows) {
        if (axis >= row.coordinates.size()) continue;
        const double v = row.coordinates[axis];
        if (first) {
            r = {v, v};
            first = false;
        } else {
            r.lo = std::min(r.lo, v);
            r.hi = std::max(r.hi, v);
        }
    }
    if (!(r.hi > r.lo)) {
        r.lo -= 1.0;
        r.hi += 1.0;
    }
    return r;
}

}  // namespace

std::string pi_heatmap_pair(const PersistenceImage& experimental, const PersistenceImage& synthetic,
                            const std::string& title) {
    double scale_max = 0.0;
    for (double v : experimental.values()) scale_max = std::max(scale_max, v);
    for (double v : synthetic.values()) scale_max = std::max(scale_max, v);

    std::ostringstream out;
    open_svg(out, 560, 340, title);
    heatmap(out, experimental, scale_max, 30, 40, 240, "experimental");
    heatmap(out, synthetic, scale_max, 300, 40, 240, "synthetic");
    out << "<text x=\"280\" y=\"330\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">color scale 0 .. "
        << num(scale_max) << " (persistence ↑)</text>\n";
    out << "</svg>\n";
    return out.str();
}

std::string pca_panels(const std::vector<ProjectionRow>& rows, const std::string& title) {
    constexpr std::array<std::array<std::size_t, 2>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
    constexpr double panel = 220;
    constexpr double margin = 30;
    std::ostringstream out;
    open_svg(out, static_cast<int>(3 * (panel + margin) + margin), static_cast<int>(panel + 90), title);

    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto [ax, ay] = pairs[p];
        const double x0 = margin + static_cast<double>(p) * (panel + margin);
        const double y0 = 40;
        const Range rx = axis_range(rows, ax);
        const Range ry = axis_range(rows, ay);
        out << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(panel)
            << "\" height=\"" << num(panel) << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (const auto& row : rows) {
            if (ay >= row.coordinates.size()) continue;
            const double px = x0 + (row.coordinates[ax] - rx.lo) / (rx.hi - rx.lo) * panel;
            const double py = y0 + panel - (row.coordinates[ay] - ry.lo) / (ry.hi - ry.lo) * panel;
            if (row.origin == Origin::experimental) {
                out << "<circle cx=\"" << num(px) << "\" cy=\"" << num(py)
                    << "\" r=\"2\" fill=\"#1f77b4\" fill-opacity=\"0.6\"/>\n";
            } else {
                out << "<rect x=\"" << num(px - 2) << "\" y=\"" << num(py - 2)
                    << "\" width=\"4\" height=\"4\" fill=\"#d62728\" fill-opacity=\"0.6\"/>\n";
            }
        }
        out << "<text x=\"" << num(x0 + panel / 2) << "\" y=\"" << num(y0 + panel + 18)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">PC" << ax + 1
            << " vs PC" << ay + 1 << "</text>\n";
    }
    out << "<text x=\"" << num(margin) << "\" y=\"" << num(panel + 80)
        << "\" font-family=\"sans-serif\" font-size=\"11\">circles: experimental, squares: "
           "synthetic</text>\n";
    out << "</svg>\n";
    return out.str();
}

std::string area_fraction_chart(const AreaFractionCurve& experimental,
                                const AreaFractionCurve& synthetic, const std::string& title) {
    constexpr double x0 = 50;
    constexpr double y0 = 40;
    constexpr double w = 400;
    constexpr double h = 260;
    std::ostringstream out;
    open_svg(out, 500, 350, title);
    out << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(w)
        << "\" height=\"" << num(h) << "\" fill=\"none\" stroke=\"black\"/>\n";

    auto polyline = [&](const AreaFractionCurve& c, const char* color, const char* dash) {
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"";
        if (dash) out << " stroke-dasharray=\"" << dash << '"';
        out << " points=\"";
        for (std::size_t j = 0; j < c.thresholds.size(); ++j) {
            if (j) out << ' ';
            out << num(x0 + c.thresholds[j] * w) << ',' << num(y0 + h - c.fractions[j] * h);
        }
        out << "\"/>\n";
    };
    polyline(experimental, "#1f77b4", nullptr);
    polyline(synthetic, "#d62728", "6,4");

    for (int tick = 0; tick <= 4; ++tick) {
        const double t = tick / 4.0;
        out << "<text x=\"" << num(x0 + t * w) << "\" y=\"" << num(y0 + h + 16)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << num(t)
            << "</text>\n";
        out << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(y0 + h - t * h + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << num(t)
            << "</text>\n";
    }
    out << "<text x=\"" << num(x0 + w / 2) << "\" y=\"" << num(y0 + h + 34)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">threshold "
           "(solid: experimental, dashed: synthetic)</text>\n";
    out << "</svg>\n";
    return out.str();
}

}  // namespace mfid::svg
