#include "monoflow/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "monoflow/common.hpp"

namespace monoflow {

namespace {
constexpr double W = 760, H = 520;
constexpr double ML = 70, MR = 20, MT = 40, MB = 55;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}
}  // namespace

void write_loglog_svg(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<PlotCurve>& curves) {
    double lx0 = 0, lx1 = 1, ly0 = 0, ly1 = 1;
    bool any = false;
    for (const auto& c : curves)
        for (size_t i = 0; i < c.x.size(); ++i) {
            if (!(c.x[i] > 0.0) || !(c.y[i] > 0.0)) continue;
            double lx = std::log10(c.x[i]), ly = std::log10(c.y[i]);
            if (!any) {
                lx0 = lx1 = lx;
                ly0 = ly1 = ly;
                any = true;
            } else {
                lx0 = std::min(lx0, lx);
                lx1 = std::max(lx1, lx);
                ly0 = std::min(ly0, ly);
                ly1 = std::max(ly1, ly);
            }
        }
    if (lx1 - lx0 < 1e-12) lx1 = lx0 + 1;
    if (ly1 - ly0 < 1e-12) ly1 = ly0 + 1;

    auto px = [&](double lx) { return ML + (lx - lx0) / (lx1 - lx0) * (W - ML - MR); };
    auto py = [&](double ly) { return H - MB - (ly - ly0) / (ly1 - ly0) * (H - MT - MB); };

    std::ofstream out(path);
    if (!out) throw SolverError("cannot open for writing: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
        << title << "</text>\n";

    // frame
    out << "<rect x=\"" << ML << "\" y=\"" << MT << "\" width=\"" << W - ML - MR
        << "\" height=\"" << H - MT - MB << "\" fill=\"none\" stroke=\"#333\"/>\n";

    // decade ticks
    for (int d = static_cast<int>(std::ceil(lx0)); d <= static_cast<int>(std::floor(lx1)); ++d) {
        double x = px(d);
        out << "<line x1=\"" << x << "\" y1=\"" << H - MB << "\" x2=\"" << x << "\" y2=\""
            << H - MB + 5 << "\" stroke=\"#333\"/>\n";
        out << "<text x=\"" << x << "\" y=\"" << H - MB + 20
            << "\" text-anchor=\"middle\" font-size=\"11\">1e" << d << "</text>\n";
    }
    for (int d = static_cast<int>(std::ceil(ly0)); d <= static_cast<int>(std::floor(ly1)); ++d) {
        double y = py(d);
        out << "<line x1=\"" << ML - 5 << "\" y1=\"" << y << "\" x2=\"" << ML << "\" y2=\"" << y
            << "\" stroke=\"#333\"/>\n";
        out << "<text x=\"" << ML - 8 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-size=\"11\">1e" << d << "</text>\n";
    }
    out << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n";
    out << "<text x=\"18\" y=\"" << H / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 " << H / 2
        << ")\">" << y_label << "</text>\n";

    int ci = 0;
    for (const auto& c : curves) {
        const char* color = kColors[ci % 4];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < c.x.size(); ++i) {
            if (!(c.x[i] > 0.0) || !(c.y[i] > 0.0)) continue;
            out << fmt(px(std::log10(c.x[i]))) << ',' << fmt(py(std::log10(c.y[i]))) << ' ';
        }
        out << "\"/>\n";
        out << "<text x=\"" << W - MR - 8 << "\" y=\"" << MT + 18 + 16 * ci
            << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">" << c.name
            << "</text>\n";
        ++ci;
    }
    out << "</svg>\n";
}

}  // namespace monoflow
