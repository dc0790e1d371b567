#include "causal_audit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "causal_audit/errors.hpp"

namespace causal_audit {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 55.0;

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    out.reserve(s.size());
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

struct Frame {
    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;

    double px(double x) const {
        const double span = x_max - x_min;
        const double t = span == 0.0 ? 0.5 : (x - x_min) / span;
        return kMarginLeft + t * (kWidth - kMarginLeft - kMarginRight);
    }
    double py(double y) const {
        const double span = y_max - y_min;
        const double t = span == 0.0 ? 0.5 : (y - y_min) / span;
        return kHeight - kMarginBottom - t * (kHeight - kMarginTop - kMarginBottom);
    }
};

// Pads a degenerate or tight range so strokes stay visible.
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

void open_svg(std::ostringstream& out, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth) << "\" height=\""
        << fmt(kHeight) << "\" viewBox=\"0 0 " << fmt(kWidth) << " " << fmt(kHeight) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"22\" font-family=\"sans-serif\" "
        << "font-size=\"15\" text-anchor=\"middle\">" << escape_xml(title) << "</text>\n";
}

void draw_axes(std::ostringstream& out, const Frame& f, const std::string& x_label,
               const std::string& y_label) {
    const double x0 = kMarginLeft, x1 = kWidth - kMarginRight;
    const double y0 = kHeight - kMarginBottom, y1 = kMarginTop;
    out << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(x1)
        << "\" y2=\"" << fmt(y0) << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(x0)
        << "\" y2=\"" << fmt(y1) << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double tx = f.x_min + (f.x_max - f.x_min) * i / 5.0;
        const double ty = f.y_min + (f.y_max - f.y_min) * i / 5.0;
        out << "<line x1=\"" << fmt(f.px(tx)) << "\" y1=\"" << fmt(y0) << "\" x2=\""
            << fmt(f.px(tx)) << "\" y2=\"" << fmt(y0 + 4) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt(f.px(tx)) << "\" y=\"" << fmt(y0 + 18)
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << fmt(tx)
            << "</text>\n";
        out << "<line x1=\"" << fmt(x0 - 4) << "\" y1=\"" << fmt(f.py(ty)) << "\" x2=\""
            << fmt(x0) << "\" y2=\"" << fmt(f.py(ty)) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt(x0 - 8) << "\" y=\"" << fmt(f.py(ty) + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << fmt(ty)
            << "</text>\n";
    }
    out << "<text x=\"" << fmt((x0 + x1) / 2) << "\" y=\"" << fmt(kHeight - 12)
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">"
        << escape_xml(x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << fmt((y0 + y1) / 2)
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
        << "transform=\"rotate(-90 16 " << fmt((y0 + y1) / 2) << ")\">" << escape_xml(y_label)
        << "</text>\n";
}

void draw_legend(std::ostringstream& out, const std::vector<std::pair<std::string, std::string>>&
                                              entries) {
    double y = kMarginTop + 6;
    const double x = kWidth - kMarginRight - 170;
    for (const auto& [label, color] : entries) {
        out << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y - 9) << "\" width=\"12\" height=\"12\" "
            << "fill=\"" << color << "\"/>\n";
        out << "<text x=\"" << fmt(x + 18) << "\" y=\"" << fmt(y + 2)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(label)
            << "</text>\n";
        y += 18;
    }
}

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<SeriesXY>& series) {
    if (series.empty()) throw DomainError("line_chart_svg: no series");
    Frame f;
    bool first = true;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            if (first) {
                f.x_min = f.x_max = x;
                f.y_min = f.y_max = y;
                first = false;
            }
            f.x_min = std::min(f.x_min, x);
            f.x_max = std::max(f.x_max, x);
            f.y_min = std::min(f.y_min, y);
            f.y_max = std::max(f.y_max, y);
        }
    }
    if (first) throw DomainError("line_chart_svg: no points");
    pad_range(f.x_min, f.x_max);
    pad_range(f.y_min, f.y_max);

    std::ostringstream out;
    open_svg(out, title);
    draw_axes(out, f, x_label, y_label);
    // Zero reference line when the y range crosses zero.
    if (f.y_min < 0.0 && f.y_max > 0.0) {
        out << "<line x1=\"" << fmt(kMarginLeft) << "\" y1=\"" << fmt(f.py(0.0)) << "\" x2=\""
            << fmt(kWidth - kMarginRight) << "\" y2=\"" << fmt(f.py(0.0))
            << "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
    }
    std::vector<std::pair<std::string, std::string>> legend;
    for (const auto& s : series) {
        legend.emplace_back(s.label, s.color);
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
        for (const auto& [x, y] : s.points) out << fmt(f.px(x)) << "," << fmt(f.py(y)) << " ";
        out << "\"/>\n";
        if (s.markers) {
            for (const auto& [x, y] : s.points) {
                out << "<circle cx=\"" << fmt(f.px(x)) << "\" cy=\"" << fmt(f.py(y))
                    << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
            }
        }
    }
    draw_legend(out, legend);
    out << "</svg>\n";
    return out.str();
}

std::string overlap_histogram_svg(const std::string& title, const std::string& x_label,
                                  const std::vector<HistogramGroup>& groups, int bins, double lo,
                                  double hi) {
    if (groups.empty()) throw DomainError("overlap_histogram_svg: no groups");
    if (bins < 1 || !(hi > lo)) throw ConfigError("overlap_histogram_svg: bad bin range");

    // Density per bin so unequal group sizes stay comparable.
    std::vector<std::vector<double>> density(groups.size(), std::vector<double>(bins, 0.0));
    const double width = (hi - lo) / bins;
    double peak = 0.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& values = groups[g].values;
        if (values.empty()) continue;
        for (double v : values) {
            int b = static_cast<int>((v - lo) / width);
            b = std::clamp(b, 0, bins - 1);
            density[g][static_cast<std::size_t>(b)] += 1.0;
        }
        for (double& d : density[g]) {
            d /= static_cast<double>(values.size());
            peak = std::max(peak, d);
        }
    }
    Frame f{lo, hi, 0.0, peak > 0 ? peak * 1.05 : 1.0};

    std::ostringstream out;
    open_svg(out, title);
    draw_axes(out, f, x_label, "share of group");
    std::vector<std::pair<std::string, std::string>> legend;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        legend.emplace_back(groups[g].label, groups[g].color);
        for (int b = 0; b < bins; ++b) {
            const double d = density[g][static_cast<std::size_t>(b)];
            if (d == 0.0) continue;
            const double x0 = f.px(lo + b * width);
            const double x1 = f.px(lo + (b + 1) * width);
            const double y0 = f.py(0.0);
            const double y1 = f.py(d);
            out << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y1) << "\" width=\""
                << fmt(x1 - x0) << "\" height=\"" << fmt(y0 - y1) << "\" fill=\""
                << groups[g].color << "\" fill-opacity=\"0.45\"/>\n";
        }
    }
    draw_legend(out, legend);
    out << "</svg>\n";
    return out.str();
}

std::string forest_plot_svg(const std::string& title, const std::string& x_label,
                            const std::vector<ForestItem>& items) {
    if (items.empty()) throw DomainError("forest_plot_svg: no items");
    double lo = items[0].low, hi = items[0].high;
    for (const auto& it : items) {
        lo = std::min({lo, it.low, it.point});
        hi = std::max({hi, it.high, it.point});
    }
    lo = std::min(lo, 0.0);
    hi = std::max(hi, 0.0);
    pad_range(lo, hi);
    Frame f{lo, hi, 0.0, static_cast<double>(items.size())};

    std::ostringstream out;
    open_svg(out, title);
    const double x0 = kMarginLeft, x1 = kWidth - kMarginRight;
    const double y_bottom = kHeight - kMarginBottom;
    out << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y_bottom) << "\" x2=\"" << fmt(x1)
        << "\" y2=\"" << fmt(y_bottom) << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double tx = lo + (hi - lo) * i / 5.0;
        out << "<line x1=\"" << fmt(f.px(tx)) << "\" y1=\"" << fmt(y_bottom) << "\" x2=\""
            << fmt(f.px(tx)) << "\" y2=\"" << fmt(y_bottom + 4) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt(f.px(tx)) << "\" y=\"" << fmt(y_bottom + 18)
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << fmt(tx)
            << "</text>\n";
    }
    out << "<line x1=\"" << fmt(f.px(0.0)) << "\" y1=\"" << fmt(kMarginTop) << "\" x2=\""
        << fmt(f.px(0.0)) << "\" y2=\"" << fmt(y_bottom)
        << "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
    out << "<text x=\"" << fmt((x0 + x1) / 2) << "\" y=\"" << fmt(kHeight - 12)
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">"
        << escape_xml(x_label) << "</text>\n";

    const double row_h = (y_bottom - kMarginTop) / static_cast<double>(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        const double cy = kMarginTop + row_h * (static_cast<double>(i) + 0.5);
        const auto& it = items[i];
        out << "<line x1=\"" << fmt(f.px(it.low)) << "\" y1=\"" << fmt(cy) << "\" x2=\""
            << fmt(f.px(it.high)) << "\" y2=\"" << fmt(cy)
            << "\" stroke=\"#1f6fb2\" stroke-width=\"2\"/>\n";
        for (double cap : {it.low, it.high}) {
            out << "<line x1=\"" << fmt(f.px(cap)) << "\" y1=\"" << fmt(cy - 5) << "\" x2=\""
                << fmt(f.px(cap)) << "\" y2=\"" << fmt(cy + 5)
                << "\" stroke=\"#1f6fb2\" stroke-width=\"2\"/>\n";
        }
        out << "<rect x=\"" << fmt(f.px(it.point) - 4) << "\" y=\"" << fmt(cy - 4)
            << "\" width=\"8\" height=\"8\" fill=\"#13294b\"/>\n";
        out << "<text x=\"" << fmt(x0 + 4) << "\" y=\"" << fmt(cy - 10)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(it.label)
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace causal_audit
