#include "doa/svg.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <ostream>

namespace doa {
namespace {

constexpr double kSize = 480.0;
constexpr double kMargin = 40.0;

struct Frame {
    const Region& r;
    double px(double x) const { return kMargin + (x - r.lower(0)) / (r.upper(0) - r.lower(0)) * kSize; }
    double py(double y) const { return kMargin + (r.upper(1) - y) / (r.upper(1) - r.lower(1)) * kSize; }
};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

// Piecewise-linear blue -> yellow -> red.
std::string colour(double t) {
    t = std::clamp(t, 0.0, 1.0);
    static constexpr std::array<std::array<double, 3>, 3> stops{{{49, 54, 149}, {254, 224, 144}, {165, 0, 38}}};
    const double s = t * 2.0;
    const int k = std::min(1, static_cast<int>(s));
    const double u = s - k;
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(stops[k][0] + u * (stops[k + 1][0] - stops[k][0])),
                  static_cast<int>(stops[k][1] + u * (stops[k + 1][1] - stops[k][1])),
                  static_cast<int>(stops[k][2] + u * (stops[k + 1][2] - stops[k][2])));
    return buf;
}

void header(std::ostream& os, const Region& r, const std::string& title) {
    const double w = kSize + 2 * kMargin;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << w << "\" viewBox=\"0 0 " << w
       << ' ' << w << "\">\n";
    os << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kSize << "\" height=\"" << kSize
       << "\" fill=\"white\" stroke=\"black\"/>\n";
    os << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
       << "</text>\n";
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-size=\"10\">%g</text>\n<text x=\"%g\" y=\"%g\" font-size=\"10\" "
                  "text-anchor=\"end\">%g</text>\n",
                  kMargin, kMargin + kSize + 14, r.lower(0), kMargin + kSize, kMargin + kSize + 14, r.upper(0));
    os << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-size=\"10\" text-anchor=\"end\">%g</text>\n<text x=\"%g\" y=\"%g\" "
                  "font-size=\"10\" text-anchor=\"end\">%g</text>\n",
                  kMargin - 4, kMargin + kSize, r.lower(1), kMargin - 4, kMargin + 10, r.upper(1));
    os << buf;
}

}  // namespace

void write_scatter_svg(std::ostream& os, const Region& region, const std::vector<ScatterPoint>& pts, double vmax,
                       const std::string& title) {
    require_dim("scatter region", 2, region.dim());
    const Frame f{region};
    header(os, region, title);
    char buf[192];
    for (const auto& p : pts) {
        if (!region.contains(Eigen::Vector2d(p.x1, p.x2))) continue;
        const std::string c = colour(vmax > 0 ? p.value / vmax : 0.0);
        if (p.censored)
            std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"none\" stroke=\"%s\"/>\n",
                          f.px(p.x1), f.py(p.x2), c.c_str());
        else
            std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"%s\"/>\n", f.px(p.x1),
                          f.py(p.x2), c.c_str());
        os << buf;
    }
    os << "</svg>\n";
}

void write_level_curves_svg(std::ostream& os, const Region& region, const std::vector<LevelCurve>& curves,
                            const std::string& title) {
    require_dim("level curve region", 2, region.dim());
    const Frame f{region};
    header(os, region, title);
    char buf[96];
    for (std::size_t k = 0; k < curves.size(); ++k) {
        const double t = curves.size() > 1 ? static_cast<double>(k) / static_cast<double>(curves.size() - 1) : 0.0;
        const std::string c = colour(t);
        for (const auto& line : curves[k].polylines) {
            os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
            for (const auto& v : line) {
                std::snprintf(buf, sizeof buf, "%.2f,%.2f ", f.px(v.x()), f.py(v.y()));
                os << buf;
            }
            os << "\"/>\n";
        }
        std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"10\" fill=\"%s\">V=%g</text>\n",
                      kMargin + kSize - 50, kMargin + 14 + 12 * static_cast<double>(k), c.c_str(), curves[k].level);
        os << buf;
    }
    os << "</svg>\n";
}

}  // namespace doa
