#include "thresh/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace thresh::svg {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 540;
constexpr int kLeft = 80, kRight = 30, kTop = 50, kBottom = 60;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[40];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

} // namespace

void LinePlot::add(std::string name, std::vector<double> x, std::vector<double> y) {
    series.push_back(Series{std::move(name), std::move(x), std::move(y)});
}

std::string LinePlot::render() const {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    auto usable = [&](double vx, double vy) {
        if (!std::isfinite(vx) || !std::isfinite(vy)) return false;
        if (log_x && !(vx > 0)) return false;
        if (log_y && !(vy > 0)) return false;
        return true;
    };
    std::size_t count = 0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!usable(s.x[i], s.y[i])) continue;
            const double tx = log_x ? std::log10(s.x[i]) : s.x[i];
            const double ty = log_y ? std::log10(s.y[i]) : s.y[i];
            xmin = std::min(xmin, tx);
            xmax = std::max(xmax, tx);
            ymin = std::min(ymin, ty);
            ymax = std::max(ymax, ty);
            ++count;
        }
    if (count < 2) return "";
    if (xmax - xmin < 1e-12) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (ymax - ymin < 1e-12) {
        ymin -= 0.5;
        ymax += 0.5;
    }

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double tx) { return kLeft + (tx - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double ty) { return kHeight - kBottom - (ty - ymin) / (ymax - ymin) * ph; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";

    // axes box
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << fmt(pw)
        << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

    auto ticks = [&](double lo, double hi, bool is_log) {
        std::vector<double> t;
        if (is_log) {
            for (int d = static_cast<int>(std::ceil(lo - 1e-9));
                 d <= static_cast<int>(std::floor(hi + 1e-9)); ++d)
                t.push_back(d);
            if (t.size() > 12) {
                std::vector<double> sparse;
                const std::size_t step = (t.size() + 11) / 12;
                for (std::size_t i = 0; i < t.size(); i += step) sparse.push_back(t[i]);
                t = sparse;
            }
        } else {
            for (int i = 0; i <= 5; ++i) t.push_back(lo + (hi - lo) * i / 5.0);
        }
        return t;
    };

    for (double tx : ticks(xmin, xmax, log_x)) {
        const double X = px(tx);
        out << "<line x1=\"" << fmt(X) << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << fmt(X)
            << "\" y2=\"" << kHeight - kBottom + 6 << "\" stroke=\"black\"/>\n";
        const double label = log_x ? std::pow(10.0, tx) : tx;
        out << "<text x=\"" << fmt(X) << "\" y=\"" << kHeight - kBottom + 22
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt(label, "%.3g") << "</text>\n";
    }
    for (double ty : ticks(ymin, ymax, log_y)) {
        const double Y = py(ty);
        out << "<line x1=\"" << kLeft - 6 << "\" y1=\"" << fmt(Y) << "\" x2=\"" << kLeft
            << "\" y2=\"" << fmt(Y) << "\" stroke=\"black\"/>\n";
        const double label = log_y ? std::pow(10.0, ty) : ty;
        out << "<text x=\"" << kLeft - 10 << "\" y=\"" << fmt(Y + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt(label, "%.3g") << "</text>\n";
    }

    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label
        << "</text>\n";
    out << "<text x=\"20\" y=\"" << kHeight / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 20 " << kHeight / 2 << ")\">" << y_label << "</text>\n";

    int color = 0;
    for (const auto& s : series) {
        std::ostringstream pts;
        std::size_t used = 0;
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!usable(s.x[i], s.y[i])) continue;
            const double tx = log_x ? std::log10(s.x[i]) : s.x[i];
            const double ty = log_y ? std::log10(s.y[i]) : s.y[i];
            if (used) pts << ' ';
            pts << fmt(px(tx), "%.2f") << ',' << fmt(py(ty), "%.2f");
            ++used;
        }
        if (used < 2) continue;
        const char* col = kPalette[color % 6];
        out << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\""
            << pts.str() << "\"/>\n";
        out << "<text x=\"" << kLeft + 12 << "\" y=\"" << kTop + 18 + 16 * color
            << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << col << "\">" << s.name
            << "</text>\n";
        ++color;
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace thresh::svg
