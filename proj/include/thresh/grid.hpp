#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace thresh {

// Radial mesh: uniform spacing h on (0, r_join], then uniform in x = ln r out
// to at least r_max. The seam node r_join belongs to both zones, so the outer
// nodes are r_join * exp(j*dx), j = 1, 2, ...
struct RadialGrid {
    std::vector<double> r;
    std::size_t inner_count = 0; // nodes in the uniform zone; r[inner_count-1] == r_join
    double h = 0.0;
    double dx = 0.0;
    double r_join = 0.0;

    static std::shared_ptr<const RadialGrid> make(double r_join, double r_max,
                                                  std::size_t inner_points,
                                                  std::size_t points_per_decade);

    std::size_t size() const { return r.size(); }
    double r_max() const { return r.back(); }
    // Index of the last node with r[i] <= x (x must be >= r.front()).
    std::size_t locate(double x) const;
};

// Reduced radial function u(r) = r * psi(r) sampled on a grid.
struct RadialFunction {
    std::shared_ptr<const RadialGrid> grid;
    std::vector<double> u;
    int l = 0;
    bool normalized = false;
    // Analytic contribution of the exterior tail (beyond the last node) to
    // the squared norm, filled when the decay law there is known.
    double exterior_norm_sq = 0.0;

    std::size_t size() const { return u.size(); }
    // integral of u^2 dr over the grid (exterior correction not included)
    double grid_norm_sq() const;
    double total_norm_sq() const { return grid_norm_sq() + exterior_norm_sq; }
    // Scales u so that total_norm_sq() == 1 and sets the flag.
    void normalize();
    // Cubic Hermite interpolation of u at radius x (clamped to the grid).
    double value_at(double x) const;
    // Interior sign changes (nodes) over indices [0, i_end].
    int count_nodes(std::size_t i_end) const;
};

// Three-point finite-difference derivative on a nonuniform mesh; one-sided at
// the ends. out.size() == r.size().
void derivative_nonuniform(std::span<const double> r, std::span<const double> f,
                           std::span<double> out);

// Cubic Hermite interpolation with finite-difference slopes over tabulated
// (x, y); x strictly increasing. Evaluation clamps to [x.front(), x.back()].
double hermite_interp(std::span<const double> x, std::span<const double> y, double xq);

// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 40);

} // namespace thresh
