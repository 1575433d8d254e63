#pragma once

// Minimal deterministic SVG line plots (fixed canvas, fixed palette, fixed
// number formatting) for the experiment bundles.

#include <string>
#include <vector>

namespace thresh::svg {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<Series> series;

    void add(std::string name, std::vector<double> x, std::vector<double> y);
    // Empty string when no series has at least two plottable points.
    std::string render() const;
};

} // namespace thresh::svg
