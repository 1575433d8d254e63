#include "thresh/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "thresh/kernels.hpp"

namespace thresh {

std::shared_ptr<const RadialGrid> RadialGrid::make(double r_join, double r_max,
                                                   std::size_t inner_points,
                                                   std::size_t points_per_decade) {
    if (!(r_join > 0) || !(r_max > r_join))
        throw std::invalid_argument("RadialGrid: need 0 < r_join < r_max");
    if (inner_points < 16 || points_per_decade < 16)
        throw std::invalid_argument("RadialGrid: too few points");

    auto g = std::make_shared<RadialGrid>();
    g->r_join = r_join;
    g->inner_count = inner_points;
    g->h = r_join / static_cast<double>(inner_points);
    g->dx = std::log(10.0) / static_cast<double>(points_per_decade);

    const std::size_t outer =
        static_cast<std::size_t>(std::ceil(std::log(r_max / r_join) / g->dx)) + 1;
    g->r.reserve(inner_points + outer);
    for (std::size_t i = 0; i < inner_points; ++i)
        g->r.push_back(g->h * static_cast<double>(i + 1));
    const double x0 = std::log(r_join);
    for (std::size_t j = 1; j <= outer; ++j)
        g->r.push_back(std::exp(x0 + g->dx * static_cast<double>(j)));
    return g;
}

std::size_t RadialGrid::locate(double x) const {
    auto it = std::upper_bound(r.begin(), r.end(), x);
    if (it == r.begin()) return 0;
    return static_cast<std::size_t>(it - r.begin()) - 1;
}

double RadialFunction::grid_norm_sq() const { return kernels::trapezoid_sq(grid->r, u); }

void RadialFunction::normalize() {
    const double n2 = total_norm_sq();
    if (!(n2 > 0) || !std::isfinite(n2))
        throw std::runtime_error("RadialFunction::normalize: non-positive or non-finite norm");
    const double c = 1.0 / std::sqrt(n2);
    kernels::scale(u, c);
    exterior_norm_sq *= c * c;
    normalized = true;
}

double RadialFunction::value_at(double x) const { return hermite_interp(grid->r, u, x); }

int RadialFunction::count_nodes(std::size_t i_end) const {
    int n = 0;
    i_end = std::min(i_end, u.size() - 1);
    for (std::size_t i = 0; i + 1 <= i_end; ++i)
        if (u[i] != 0.0 && u[i + 1] != 0.0 && std::signbit(u[i]) != std::signbit(u[i + 1])) ++n;
    return n;
}

void derivative_nonuniform(std::span<const double> r, std::span<const double> f,
                           std::span<double> out) {
    const std::size_t n = r.size();
    if (n < 3 || f.size() != n || out.size() != n)
        throw std::invalid_argument("derivative_nonuniform: bad sizes");
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = r[i] - r[i - 1];
        const double hr = r[i + 1] - r[i];
        out[i] = (f[i + 1] * hl * hl + f[i] * (hr * hr - hl * hl) - f[i - 1] * hr * hr) /
                 (hl * hr * (hl + hr));
    }
    {
        const double h0 = r[1] - r[0];
        const double h1 = r[2] - r[1];
        out[0] = (-f[2] * h0 * h0 + f[1] * (h0 + h1) * (h0 + h1) -
                  f[0] * (h1 * h1 + 2.0 * h0 * h1)) /
                 (h0 * h1 * (h0 + h1));
        const double g1 = r[n - 1] - r[n - 2];
        const double g0 = r[n - 2] - r[n - 3];
        out[n - 1] = (f[n - 3] * g1 * g1 - f[n - 2] * (g0 + g1) * (g0 + g1) +
                      f[n - 1] * (g0 * g0 + 2.0 * g0 * g1)) /
                     (g0 * g1 * (g0 + g1));
    }
}

double hermite_interp(std::span<const double> x, std::span<const double> y, double xq) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("hermite_interp: bad sizes");
    if (xq <= x.front()) return y.front();
    if (xq >= x.back()) return y.back();
    auto it = std::upper_bound(x.begin(), x.end(), xq);
    std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;

    const double hseg = x[i + 1] - x[i];
    auto slope = [&](std::size_t j) {
        if (j == 0) return (y[1] - y[0]) / (x[1] - x[0]);
        if (j == n - 1) return (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
        const double hl = x[j] - x[j - 1], hr = x[j + 1] - x[j];
        return (y[j + 1] * hl * hl + y[j] * (hr * hr - hl * hl) - y[j - 1] * hr * hr) /
               (hl * hr * (hl + hr));
    };
    const double m0 = slope(i), m1 = slope(i + 1);
    const double t = (xq - x[i]) / hseg;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y[i] + (t3 - 2 * t2 + t) * hseg * m0 +
           (-2 * t3 + 3 * t2) * y[i + 1] + (t3 - t2) * hseg * m1;
}

namespace {
double simpson_step(const std::function<double(double)>& f, double a, double fa, double b,
                    double fb, double m, double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}
} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

} // namespace thresh
