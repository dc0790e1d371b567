#pragma once

#include <string>
#include <utility>
#include <vector>

namespace causal_audit {

// Minimal hand-rolled SVG charts. Plots are pure views over already-computed
// report values; nothing here feeds back into analysis.

struct SeriesXY {
    std::string label;
    std::vector<std::pair<double, double>> points;
    std::string color = "#1f6fb2";
    bool markers = true;
};

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<SeriesXY>& series);

struct HistogramGroup {
    std::string label;
    std::vector<double> values;
    std::string color = "#1f6fb2";
};

// Two (or more) overlaid histograms on a shared [lo, hi] range.
std::string overlap_histogram_svg(const std::string& title, const std::string& x_label,
                                  const std::vector<HistogramGroup>& groups, int bins, double lo,
                                  double hi);

struct ForestItem {
    std::string label;
    double point = 0.0;
    double low = 0.0;
    double high = 0.0;
};

std::string forest_plot_svg(const std::string& title, const std::string& x_label,
                            const std::vector<ForestItem>& items);

}  // namespace causal_audit
