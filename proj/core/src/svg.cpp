#include "delirisk/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "delirisk/csv.hpp"

namespace delirisk {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMarginLeft = 60.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 20.0;
constexpr double kMarginBottom = 50.0;

const char* kPalette[4] = {"#1f6fb4", "#d1495b", "#3e8e5a", "#8660a8"};

struct Frame {
    double x_max = 1.0;

    double x(double v) const {
        double w = kWidth - kMarginLeft - kMarginRight;
        return kMarginLeft + w * (v / x_max);
    }
    double y(double v) const {  // v in [0,1]
        double h = kHeight - kMarginTop - kMarginBottom;
        return kMarginTop + h * (1.0 - v);
    }
};

std::string num(double v) { return format_double(v, 2); }

void open_svg(std::ostringstream& out, const std::string& provenance) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
        << kHeight << "\">\n";
    if (!provenance.empty()) out << "<!-- " << provenance << " -->\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void axes(std::ostringstream& out, const Frame& f, const std::string& x_label,
          const std::string& y_label) {
    out << "<g stroke=\"#333\" stroke-width=\"1\">\n";
    out << "<line x1=\"" << num(f.x(0)) << "\" y1=\"" << num(f.y(0)) << "\" x2=\""
        << num(f.x(f.x_max)) << "\" y2=\"" << num(f.y(0)) << "\"/>\n";
    out << "<line x1=\"" << num(f.x(0)) << "\" y1=\"" << num(f.y(0)) << "\" x2=\""
        << num(f.x(0)) << "\" y2=\"" << num(f.y(1)) << "\"/>\n";
    out << "</g>\n";
    out << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333\">\n";
    for (int i = 0; i <= 5; ++i) {
        double fy = 0.2 * i;
        out << "<text x=\"" << num(f.x(0) - 8) << "\" y=\"" << num(f.y(fy) + 4)
            << "\" text-anchor=\"end\">" << format_double(fy, 1) << "</text>\n";
        out << "<line stroke=\"#ccc\" x1=\"" << num(f.x(0)) << "\" y1=\""
            << num(f.y(fy)) << "\" x2=\"" << num(f.x(f.x_max)) << "\" y2=\""
            << num(f.y(fy)) << "\"/>\n";
    }
    for (int i = 0; i <= 6; ++i) {
        double fx = f.x_max * i / 6.0;
        out << "<text x=\"" << num(f.x(fx)) << "\" y=\"" << num(f.y(0) + 18)
            << "\" text-anchor=\"middle\">" << format_double(fx, 1) << "</text>\n";
    }
    out << "<text x=\"" << num(0.5 * (f.x(0) + f.x(f.x_max))) << "\" y=\""
        << num(kHeight - 10) << "\" text-anchor=\"middle\">" << x_label
        << "</text>\n";
    out << "<text x=\"14\" y=\"" << num(0.5 * (f.y(0) + f.y(1)))
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << num(0.5 * (f.y(0) + f.y(1))) << ")\">" << y_label << "</text>\n";
    out << "</g>\n";
}

}  // namespace

std::string km_plot_svg(const std::vector<std::pair<std::string, KMCurve>>& curves,
                        const std::string& provenance) {
    Frame f;
    for (const auto& [name, curve] : curves) {
        for (const auto& pt : curve.points) f.x_max = std::max(f.x_max, pt.time);
    }
    f.x_max = std::max(1.0, std::ceil(f.x_max));

    std::ostringstream out;
    open_svg(out, provenance);
    axes(out, f, "months since index admission", "event-free probability");

    int color = 0;
    for (const auto& [name, curve] : curves) {
        const char* c = kPalette[color % 4];
        // Confidence band as a closed polygon: upper bound steps forward,
        // lower bound steps back. Both bounds hold their value from one
        // event time to the next.
        const auto& pts = curve.points;
        std::ostringstream band;
        double hi = 1.0;
        band << "M" << num(f.x(0)) << "," << num(f.y(1.0));
        for (const auto& pt : pts) {
            band << " L" << num(f.x(pt.time)) << "," << num(f.y(hi));
            hi = pt.ci_hi;
            band << " L" << num(f.x(pt.time)) << "," << num(f.y(hi));
        }
        band << " L" << num(f.x(f.x_max)) << "," << num(f.y(hi));
        double lo = pts.empty() ? 1.0 : pts.back().ci_lo;
        band << " L" << num(f.x(f.x_max)) << "," << num(f.y(lo));
        for (std::size_t i = pts.size(); i-- > 0;) {
            double prev_lo = i == 0 ? 1.0 : pts[i - 1].ci_lo;
            band << " L" << num(f.x(pts[i].time)) << "," << num(f.y(pts[i].ci_lo));
            band << " L" << num(f.x(pts[i].time)) << "," << num(f.y(prev_lo));
        }
        band << " Z";
        out << "<path d=\"" << band.str() << "\" fill=\"" << c
            << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";

        // Survival step line.
        std::ostringstream line;
        double s = 1.0;
        line << "M" << num(f.x(0)) << "," << num(f.y(1.0));
        for (const auto& pt : curve.points) {
            line << " L" << num(f.x(pt.time)) << "," << num(f.y(s));
            s = pt.survival;
            line << " L" << num(f.x(pt.time)) << "," << num(f.y(s));
        }
        line << " L" << num(f.x(f.x_max)) << "," << num(f.y(s));
        out << "<path d=\"" << line.str() << "\" fill=\"none\" stroke=\"" << c
            << "\" stroke-width=\"2\"/>\n";

        out << "<text font-family=\"sans-serif\" font-size=\"13\" x=\""
            << num(f.x(0.55 * f.x_max)) << "\" y=\""
            << num(kMarginTop + 18.0 * (color + 1)) << "\" fill=\"" << c << "\">"
            << name << "</text>\n";
        ++color;
    }
    out << "</svg>\n";
    return out.str();
}

std::string roc_plot_svg(const std::vector<RocPoint>& points, double auc,
                         const std::string& provenance) {
    Frame f;
    f.x_max = 1.0;
    std::ostringstream out;
    open_svg(out, provenance);
    axes(out, f, "false positive rate", "true positive rate");
    out << "<line stroke=\"#999\" stroke-dasharray=\"5,4\" x1=\"" << num(f.x(0))
        << "\" y1=\"" << num(f.y(0)) << "\" x2=\"" << num(f.x(1)) << "\" y2=\""
        << num(f.y(1)) << "\"/>\n";
    std::ostringstream line;
    bool first = true;
    for (const auto& pt : points) {
        line << (first ? "M" : " L") << num(f.x(pt.fpr)) << "," << num(f.y(pt.tpr));
        first = false;
    }
    out << "<path d=\"" << line.str() << "\" fill=\"none\" stroke=\""
        << kPalette[0] << "\" stroke-width=\"2\"/>\n";
    out << "<text font-family=\"sans-serif\" font-size=\"14\" x=\"" << num(f.x(0.6))
        << "\" y=\"" << num(f.y(0.1)) << "\">AUROC = " << format_double(auc, 4)
        << "</text>\n";
    out << "</svg>\n";
    return out.str();
}

}  // namespace delirisk
