#include "bcfg/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace bcfg {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 540.0;
constexpr double kPad = 48.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Affine data-to-pixel map with a flipped vertical axis.
struct Frame {
    double x0, y0, scale_x, scale_y;

    double x(double v) const { return kPad + (v - x0) * scale_x; }
    double y(double v) const { return kHeight - kPad - (v - y0) * scale_y; }
};

std::string svg_open(const std::string& title) {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
        << kHeight << "\">\n";
    out << "<title>" << title << "</title>\n";
    out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << kPad << "\" y=\"24\" font-family=\"sans-serif\" "
           "font-size=\"14\">"
        << title << "</text>\n";
    return out.str();
}

const char* class_fill(PointClass c) {
    switch (c) {
        case PointClass::local_minimum: return "#e3f2e1";
        case PointClass::saddle: return "#f9e0e0";
        case PointClass::degenerate: return "#e8e8e8";
    }
    return "#ffffff";
}

}  // namespace

std::string emit_plot(const BranchRecord& record, PlotKind kind) {
    if (record.points.empty())
        throw EmptyBranch("cannot plot a branch with no points");
    const int n = static_cast<int>(record.masses.size());
    const int d = record.dimension;

    std::ostringstream out;

    if (kind == PlotKind::trajectories) {
        // d = 3 projects onto the (axis-1, axis-2) plane transverse to the
        // weighted axis; d = 2 shows the full (axis-0, axis-1) plane.
        const int ax = (d == 3) ? 1 : 0;
        const int ay = (d == 3) ? 2 : 1;
        const std::string proj = (d == 3) ? "(y, z)" : "(x, y)";

        double lo = 1e300, hi = -1e300;
        for (const BranchPoint& p : record.points) {
            for (int i = 0; i < n; ++i) {
                lo = std::min({lo, p.q.coords()[i * d + ax],
                               p.q.coords()[i * d + ay]});
                hi = std::max({hi, p.q.coords()[i * d + ax],
                               p.q.coords()[i * d + ay]});
            }
        }
        const double margin = 0.08 * std::max(hi - lo, 1e-12);
        lo -= margin;
        hi += margin;
        const double scale =
            std::min(kWidth - 2.0 * kPad, kHeight - 2.0 * kPad) / (hi - lo);
        const Frame f{lo, lo, scale, scale};

        out << svg_open("body trajectories of branch '" + record.scenario +
                        "' (s* = " + fmt6(record.s_star) + ", " +
                        record.direction + "), projection " + proj);
        for (int i = 0; i < n; ++i) {
            const char* color = kPalette[i % 8];
            out << "<polyline fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"1.5\" points=\"";
            for (const BranchPoint& p : record.points)
                out << px(f.x(p.q.coords()[i * d + ax])) << ","
                    << px(f.y(p.q.coords()[i * d + ay])) << " ";
            out << "\"/>\n";
            const BranchPoint& a = record.points.front();
            const BranchPoint& b = record.points.back();
            out << "<circle cx=\"" << px(f.x(a.q.coords()[i * d + ax]))
                << "\" cy=\"" << px(f.y(a.q.coords()[i * d + ay]))
                << "\" r=\"5\" fill=\"" << color << "\"/>\n";
            out << "<rect x=\"" << px(f.x(b.q.coords()[i * d + ax]) - 4.5)
                << "\" y=\"" << px(f.y(b.q.coords()[i * d + ay]) - 4.5)
                << "\" width=\"9\" height=\"9\" fill=\"" << color << "\"/>\n";
            out << "<text x=\"" << kWidth - kPad - 70 << "\" y=\""
                << 40 + 16 * i << "\" font-family=\"sans-serif\" "
                << "font-size=\"12\" fill=\"" << color << "\">body " << i + 1
                << "</text>\n";
        }
        out << "<text x=\"" << kPad << "\" y=\"" << kHeight - 12
            << "\" font-family=\"sans-serif\" font-size=\"12\">circle = start, "
               "square = end</text>\n";
        out << "</svg>\n";
        return out.str();
    }

    // s_profile: s against arclength with classification bands underneath
    // and the turning points marked.
    double arc_lo = record.points.front().arclength;
    double arc_hi = record.points.back().arclength;
    double s_lo = 1e300, s_hi = -1e300;
    for (const BranchPoint& p : record.points) {
        s_lo = std::min(s_lo, p.s);
        s_hi = std::max(s_hi, p.s);
    }
    if (arc_hi - arc_lo < 1e-12) arc_hi = arc_lo + 1e-12;
    if (s_hi - s_lo < 1e-12) s_hi = s_lo + 1e-12;
    const double s_margin = 0.05 * (s_hi - s_lo);
    s_lo -= s_margin;
    s_hi += s_margin;
    const Frame f{arc_lo, s_lo, (kWidth - 2.0 * kPad) / (arc_hi - arc_lo),
                  (kHeight - 2.0 * kPad) / (s_hi - s_lo)};

    out << svg_open("parameter profile of branch '" + record.scenario +
                    "' (s* = " + fmt6(record.s_star) + ", " + record.direction +
                    ")");

    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= record.points.size(); ++i) {
        if (i < record.points.size() &&
            record.points[i].classification ==
                record.points[run_start].classification)
            continue;
        const double xa = f.x(record.points[run_start].arclength);
        const double xb = f.x(record.points[i - 1].arclength);
        out << "<rect x=\"" << px(xa) << "\" y=\"" << px(kPad) << "\" width=\""
            << px(std::max(xb - xa, 1.0)) << "\" height=\""
            << px(kHeight - 2.0 * kPad) << "\" fill=\""
            << class_fill(record.points[run_start].classification) << "\"/>\n";
        run_start = i;
    }

    out << "<polyline fill=\"none\" stroke=\"#222222\" stroke-width=\"1.5\" "
           "points=\"";
    for (const BranchPoint& p : record.points)
        out << px(f.x(p.arclength)) << "," << px(f.y(p.s)) << " ";
    out << "\"/>\n";

    for (const BranchEvent& e : record.events) {
        if (e.kind != EventKind::turning_point) continue;
        if (e.index < 0 || e.index >= static_cast<int>(record.points.size()))
            continue;
        const BranchPoint& p = record.points[e.index];
        out << "<circle cx=\"" << px(f.x(p.arclength)) << "\" cy=\""
            << px(f.y(p.s)) << "\" r=\"5\" fill=\"none\" stroke=\"#d62728\" "
            << "stroke-width=\"2\"/>\n";
    }

    out << "<text x=\"" << kPad << "\" y=\"" << kHeight - 12
        << "\" font-family=\"sans-serif\" font-size=\"12\">arclength "
        << fmt6(arc_lo) << " .. " << fmt6(arc_hi) << ", s " << fmt6(s_lo)
        << " .. " << fmt6(s_hi)
        << "; circles = turning points; band = classification (green "
           "minimum, red saddle, grey degenerate)</text>\n";
    out << "</svg>\n";
    return out.str();
}

}  // namespace bcfg
